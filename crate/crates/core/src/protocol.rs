//! The rotation sweep: every rotated embedding set of a model is compared
//! against that model's unrotated control set, and the per-angle scores are
//! averaged per model.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{self, compensated_sum, knn_indices, mutual_knn_from_indices};
use crate::store::{read_embeddings, EmbeddingSet, ManifestEntry, ModelManifest};

/// The unrotated condition every other angle is compared against.
pub const CONTROL_ANGLE: u32 = 0;

/// Strictly increasing rotation angles in `[0, 360)` that include the control.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AngleGrid {
    angles: Vec<u32>,
}

impl AngleGrid {
    /// The half-open grid `start, start + step, ..., < end`.
    pub fn build(start: u32, end: u32, step: u32) -> Result<Self> {
        if step == 0 {
            return Err(Error::Domain("angle step must be positive".into()));
        }
        if start >= end || end > 360 {
            return Err(Error::Domain(format!(
                "angle range {start}..{end} must be nonempty and within [0, 360]"
            )));
        }
        if !(end - start).is_multiple_of(step) {
            return Err(Error::Domain(format!(
                "step {step} does not divide the range {start}..{end}"
            )));
        }
        Self::new((start..end).step_by(step as usize).collect())
    }

    pub fn new(angles: Vec<u32>) -> Result<Self> {
        if angles.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Domain("angles must be strictly increasing".into()));
        }
        if angles.iter().any(|&a| a >= 360) {
            return Err(Error::Domain("angles must lie in [0, 360)".into()));
        }
        if !angles.contains(&CONTROL_ANGLE) {
            return Err(Error::Domain("angle grid must contain the control angle 0".into()));
        }
        Ok(AngleGrid { angles })
    }

    pub fn angles(&self) -> &[u32] {
        &self.angles
    }

    /// Every angle except the control.
    pub fn rotated(&self) -> impl Iterator<Item = u32> + '_ {
        self.angles.iter().copied().filter(|&a| a != CONTROL_ANGLE)
    }
}

impl Default for AngleGrid {
    fn default() -> Self {
        AngleGrid::build(0, 360, 15).unwrap()
    }
}

/// Parses `start:end:step`.
impl FromStr for AngleGrid {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let [start, end, step] = parts.as_slice() else {
            return Err(Error::Domain(format!("expected start:end:step, got {s:?}")));
        };
        let num = |p: &str| {
            p.trim()
                .parse::<u32>()
                .map_err(|_| Error::Domain(format!("bad angle component {p:?} in {s:?}")))
        };
        AngleGrid::build(num(start)?, num(end)?, num(step)?)
    }
}

impl fmt::Display for AngleGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.angles.iter().map(u32::to_string).collect();
        write!(f, "[{}]", parts.join(", "))
    }
}

/// Scores for one rotated angle of one model.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AngleScore {
    pub angle: u32,
    pub mknn: f64,
    pub cosine: f64,
}

fn check_pairing(model: &str, angle: u32, control: &EmbeddingSet, rotated: &EmbeddingSet) -> Result<()> {
    if control.len() != rotated.len() || control.dim() != rotated.dim() {
        return Err(Error::Pairing(format!(
            "model {model} angle {angle}: {} x {} does not match control {} x {}",
            rotated.len(),
            rotated.dim(),
            control.len(),
            control.dim()
        )));
    }
    Ok(())
}

fn first_error<T>(results: Vec<Result<T>>) -> Result<Vec<T>> {
    results.into_iter().collect()
}

/// Scores every non-control angle of `grid` against the control, given a
/// loader for each angle's set. The control neighbour index is built once.
pub fn evaluate_with<F>(model: &str, grid: &AngleGrid, k: usize, load: F) -> Result<Vec<AngleScore>>
where
    F: Fn(u32) -> Result<EmbeddingSet> + Sync,
{
    let control = load(CONTROL_ANGLE)?;
    let control_index = knn_indices(&control, k)?;
    let angles: Vec<u32> = grid.rotated().collect();
    let scores = angles
        .par_iter()
        .map(|&angle| {
            let rotated = load(angle)?;
            check_pairing(model, angle, &control, &rotated)?;
            let rotated_index = knn_indices(&rotated, k)?;
            Ok(AngleScore {
                angle,
                mknn: mutual_knn_from_indices(&control_index, &rotated_index)?,
                cosine: metrics::cosine_distance_mean(&control, &rotated)?,
            })
        })
        .collect();
    first_error(scores)
}

/// Loads a manifest entry's files and scores every non-control grid angle.
pub fn evaluate_model(entry: &ManifestEntry, grid: &AngleGrid, k: usize) -> Result<Vec<AngleScore>> {
    for angle in grid.angles() {
        entry.path_for(*angle)?;
    }
    evaluate_with(&entry.model_name, grid, k, |angle| {
        read_embeddings(entry.path_for(angle)?)
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlignmentRow {
    pub model: String,
    pub angle: u32,
    pub mknn: f64,
    pub cosine: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelAggregate {
    pub model: String,
    pub rotation_augmented: bool,
    pub mean_mknn: f64,
    pub mean_cosine: f64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelInfo {
    pub model: String,
    pub rotation_augmented: bool,
}

/// Per-(model, angle) scores plus per-model means.
///
/// Rows are ordered by model (manifest order) then angle.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlignmentTable {
    pub k: usize,
    /// The rotated (non-control) angles every model is expected to cover.
    pub angles: Vec<u32>,
    pub models: Vec<ModelInfo>,
    pub rows: Vec<AlignmentRow>,
    pub aggregates: Vec<ModelAggregate>,
}

impl AlignmentTable {
    /// Assembles a table from per-model scores and fills in the aggregates.
    pub fn from_scores(k: usize, grid: &AngleGrid, scores: Vec<(ModelInfo, Vec<AngleScore>)>) -> Result<Self> {
        let mut models = Vec::with_capacity(scores.len());
        let mut rows = Vec::new();
        for (info, mut per_angle) in scores {
            per_angle.sort_by_key(|s| s.angle);
            rows.extend(per_angle.into_iter().map(|s| AlignmentRow {
                model: info.model.clone(),
                angle: s.angle,
                mknn: s.mknn,
                cosine: s.cosine,
            }));
            models.push(info);
        }
        let mut table = AlignmentTable {
            k,
            angles: grid.rotated().collect(),
            models,
            rows,
            aggregates: Vec::new(),
        };
        table.aggregates = aggregate(&table)?;
        Ok(table)
    }

    pub fn rows_for<'a>(&'a self, model: &'a str) -> impl Iterator<Item = &'a AlignmentRow> + 'a {
        self.rows.iter().filter(move |r| r.model == model)
    }

    pub fn is_complete(&self) -> bool {
        self.rows.len() == self.models.len() * self.angles.len()
            && self.models.iter().all(|m| self.model_complete(&m.model))
    }

    fn model_complete(&self, model: &str) -> bool {
        let mut got: Vec<u32> = self.rows_for(model).map(|r| r.angle).collect();
        got.sort_unstable();
        got == self.angles
    }
}

/// Runs every manifest entry over the grid, models in parallel.
pub fn run_sweep(manifest: &ModelManifest, grid: &AngleGrid, k: usize) -> Result<AlignmentTable> {
    let results: Vec<Result<(ModelInfo, Vec<AngleScore>)>> = manifest
        .entries
        .par_iter()
        .map(|entry| {
            let scores = evaluate_model(entry, grid, k)?;
            Ok((
                ModelInfo {
                    model: entry.model_name.clone(),
                    rotation_augmented: entry.rotation_augmented,
                },
                scores,
            ))
        })
        .collect();
    AlignmentTable::from_scores(k, grid, first_error(results)?)
}

/// Arithmetic mean of each model's per-angle scores, in model order.
pub fn aggregate(table: &AlignmentTable) -> Result<Vec<ModelAggregate>> {
    table
        .models
        .iter()
        .map(|info| {
            if table.angles.is_empty() {
                return Err(Error::Aggregation("the grid has no rotated angles".into()));
            }
            if !table.model_complete(&info.model) {
                return Err(Error::Aggregation(format!(
                    "model {} does not cover all {} rotated angles",
                    info.model,
                    table.angles.len()
                )));
            }
            let (mknn, cosine): (Vec<f64>, Vec<f64>) = table.rows_for(&info.model).map(|r| (r.mknn, r.cosine)).unzip();
            let n = mknn.len() as f64;
            Ok(ModelAggregate {
                model: info.model.clone(),
                rotation_augmented: info.rotation_augmented,
                mean_mknn: compensated_sum(&mknn) / n,
                mean_cosine: compensated_sum(&cosine) / n,
            })
        })
        .collect()
}
