//! Embedding sets, the `EMB1` file format and the experiment manifest.
//!
//! An [`EmbeddingSet`] is an `N x d` row-major matrix of `f32` latent vectors,
//! one row per source patch, tagged with the model that produced it and the
//! rotation angle of its inputs. Row `i` of every set belonging to a model
//! must come from the same source patch; the metrics pair rows by index.

mod emb1;
mod manifest;
mod synth;

pub use emb1::{read_embeddings, write_embeddings, HEADER_LEN, MAGIC, VERSION};
pub use manifest::{ManifestEntry, ModelManifest};
pub use synth::{perturb, synthesize_control, synthesize_pair};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Provenance carried in the `EMB1` metadata block.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmbeddingMeta {
    pub model: String,
    pub angle: u32,
    #[serde(default)]
    pub rotation_augmented: bool,
}

impl EmbeddingMeta {
    pub fn new(model: impl Into<String>, angle: u32) -> Self {
        EmbeddingMeta {
            model: model.into(),
            angle,
            rotation_augmented: false,
        }
    }

    pub fn augmented(mut self, flag: bool) -> Self {
        self.rotation_augmented = flag;
        self
    }
}

/// A validated, immutable `N x d` matrix of latent vectors.
///
/// Construction enforces that `N >= 2`, `d >= 1`, every element is finite,
/// every row has a strictly positive norm and the angle lies in `[0, 360)`.
#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingSet {
    data: Vec<f32>,
    n: usize,
    dim: usize,
    meta: EmbeddingMeta,
}

impl EmbeddingSet {
    pub fn new(data: Vec<f32>, n: usize, dim: usize, meta: EmbeddingMeta) -> Result<Self> {
        let set = EmbeddingSet { data, n, dim, meta };
        set.validate()?;
        Ok(set)
    }

    /// Builds a set from equally sized rows.
    pub fn from_rows<R: AsRef<[f32]>>(rows: &[R], meta: EmbeddingMeta) -> Result<Self> {
        let dim = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * dim);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != dim {
                return Err(Error::Validation(format!(
                    "row {i} has {} columns, expected {dim}",
                    row.len()
                )));
            }
            data.extend_from_slice(row);
        }
        Self::new(data, rows.len(), dim, meta)
    }

    /// Skips validation; only for exercising the write-side checks.
    #[cfg(test)]
    pub(crate) fn new_unchecked(data: Vec<f32>, n: usize, dim: usize, meta: EmbeddingMeta) -> Self {
        EmbeddingSet { data, n, dim, meta }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::Validation(format!(
                "an embedding set needs at least 2 rows, got {}",
                self.n
            )));
        }
        if self.dim < 1 {
            return Err(Error::Validation("embedding dimension must be at least 1".into()));
        }
        if self.data.len() != self.n * self.dim {
            return Err(Error::Validation(format!(
                "{} values do not form a {} x {} matrix",
                self.data.len(),
                self.n,
                self.dim
            )));
        }
        if self.meta.angle >= 360 {
            return Err(Error::Validation(format!("angle {} outside [0, 360)", self.meta.angle)));
        }
        for (i, row) in self.rows().enumerate() {
            let mut norm_sq = 0.0f64;
            for (j, &v) in row.iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::Validation(format!(
                        "non-finite value {v} at row {i}, column {j}"
                    )));
                }
                norm_sq += f64::from(v) * f64::from(v);
            }
            if norm_sq <= 0.0 {
                return Err(Error::Validation(format!("row {i} has zero norm")));
            }
        }
        Ok(())
    }

    /// Number of rows `N`.
    pub fn len(&self) -> usize {
        self.n
    }

    /// Always false for a validated set; present for API symmetry.
    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Row width `d`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, i: usize) -> &[f32] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> std::slice::ChunksExact<'_, f32> {
        self.data.chunks_exact(self.dim.max(1))
    }

    /// The row-major payload.
    pub fn as_slice(&self) -> &[f32] {
        &self.data
    }

    pub fn meta(&self) -> &EmbeddingMeta {
        &self.meta
    }

    pub fn model_name(&self) -> &str {
        &self.meta.model
    }

    pub fn angle_degrees(&self) -> u32 {
        self.meta.angle
    }

    pub fn with_meta(mut self, meta: EmbeddingMeta) -> Result<Self> {
        if meta.angle >= 360 {
            return Err(Error::Validation(format!("angle {} outside [0, 360)", meta.angle)));
        }
        self.meta = meta;
        Ok(self)
    }
}
