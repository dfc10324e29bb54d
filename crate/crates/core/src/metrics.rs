//! Alignment between a control embedding set `Z` and a rotated set `Z'`.
//!
//! Two scores are computed over rows paired by source patch:
//!
//! * **mutual k-NN**: for each row `i`, the fraction of the `k` Euclidean
//!   nearest neighbours of `z_i` (within `Z`) that are also among the `k`
//!   nearest neighbours of `z'_i` (within `Z'`), averaged over rows.
//!   Neighbourhoods are sets of row indices, so the two sets may even live in
//!   spaces of different dimension.
//! * **cosine distance**: the mean of `1 - cos(z_i, z'_i)`.
//!
//! Neighbour search is exact brute force. Rows are ranked by squared
//! distance accumulated in `f64`, ties go to the lower row index, and a row
//! is never its own neighbour.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::store::EmbeddingSet;

/// Query rows handled together so candidate rows stay in cache across them.
const QUERY_BLOCK: usize = 32;

/// The `k` nearest neighbours of every row of one embedding set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NeighborIndex {
    k: usize,
    n: usize,
    neighbors: Vec<usize>,
}

impl NeighborIndex {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Neighbours of row `i`, nearest first.
    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbors[i * self.k..(i + 1) * self.k]
    }
}

/// Both alignment scores for one control/rotated pair.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlignmentScore {
    pub mknn: f64,
    pub cosine_distance: f64,
    pub k: usize,
    pub n: usize,
}

/// Selects one of the two alignment scores.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Mknn,
    Cosine,
}

impl Metric {
    pub fn mean_of(self, agg: &crate::protocol::ModelAggregate) -> f64 {
        match self {
            Metric::Mknn => agg.mean_mknn,
            Metric::Cosine => agg.mean_cosine,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Metric::Mknn => "mknn",
            Metric::Cosine => "cosine",
        }
    }
}

impl std::fmt::Display for Metric {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mknn" => Ok(Metric::Mknn),
            "cosine" => Ok(Metric::Cosine),
            _ => Err(Error::Domain(format!("unknown metric {s:?}, expected mknn or cosine"))),
        }
    }
}

fn check_k(n: usize, k: usize) -> Result<()> {
    if k < 1 || k >= n {
        return Err(Error::Domain(format!(
            "k must lie in [1, N-1] = [1, {}], got {k}",
            n.saturating_sub(1)
        )));
    }
    Ok(())
}

#[inline]
fn squared_distance(a: &[f32], b: &[f32]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| {
            let d = f64::from(x) - f64::from(y);
            d * d
        })
        .sum()
}

#[inline]
fn rank_order(a: &(f64, usize), b: &(f64, usize)) -> std::cmp::Ordering {
    a.0.total_cmp(&b.0).then(a.1.cmp(&b.1))
}

/// Exact k-nearest-neighbour lists for every row of `set`.
pub fn knn_indices(set: &EmbeddingSet, k: usize) -> Result<NeighborIndex> {
    let n = set.len();
    check_k(n, k)?;
    let mut neighbors = vec![0usize; n * k];

    neighbors
        .par_chunks_mut(QUERY_BLOCK * k)
        .enumerate()
        .for_each(|(block, out)| {
            let q0 = block * QUERY_BLOCK;
            let q1 = (q0 + QUERY_BLOCK).min(n);
            let width = q1 - q0;
            let mut dist = vec![0.0f64; width * n];
            for j in 0..n {
                let candidate = set.row(j);
                for (qi, q) in (q0..q1).enumerate() {
                    dist[qi * n + j] = squared_distance(set.row(q), candidate);
                }
            }

            let mut ranked: Vec<(f64, usize)> = Vec::with_capacity(n - 1);
            for qi in 0..width {
                let i = q0 + qi;
                let row = &dist[qi * n..(qi + 1) * n];
                ranked.clear();
                ranked.extend(row.iter().enumerate().filter(|&(j, _)| j != i).map(|(j, &d)| (d, j)));
                if k < ranked.len() {
                    ranked.select_nth_unstable_by(k - 1, rank_order);
                }
                let top = &mut ranked[..k];
                top.sort_unstable_by(rank_order);
                for (slot, &(_, j)) in out[qi * k..(qi + 1) * k].iter_mut().zip(top.iter()) {
                    *slot = j;
                }
            }
        });

    Ok(NeighborIndex { k, n, neighbors })
}

/// Mutual k-NN from two precomputed neighbour indices.
pub fn mutual_knn_from_indices(control: &NeighborIndex, rotated: &NeighborIndex) -> Result<f64> {
    if control.len() != rotated.len() {
        return Err(Error::Pairing(format!(
            "control has {} rows, rotated has {}",
            control.len(),
            rotated.len()
        )));
    }
    if control.k() != rotated.k() {
        return Err(Error::Domain(format!(
            "neighbour indices built with different k ({} vs {})",
            control.k(),
            rotated.k()
        )));
    }
    let k = control.k();
    let n = control.len();
    let shared: u64 = (0..n)
        .into_par_iter()
        .map_init(
            || (Vec::with_capacity(k), Vec::with_capacity(k)),
            |(a, b), i| {
                a.clear();
                a.extend_from_slice(control.neighbors(i));
                a.sort_unstable();
                b.clear();
                b.extend_from_slice(rotated.neighbors(i));
                b.sort_unstable();
                sorted_intersection_len(a, b) as u64
            },
        )
        .sum();
    let score = shared as f64 / (n as f64 * k as f64);
    assert!((0.0..=1.0).contains(&score), "mutual k-NN {score} outside [0, 1]");
    Ok(score)
}

fn sorted_intersection_len(a: &[usize], b: &[usize]) -> usize {
    let (mut i, mut j, mut count) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                count += 1;
                i += 1;
                j += 1;
            }
        }
    }
    count
}

/// Mean fraction of shared k-nearest-neighbour indices between paired rows.
///
/// Neighbourhoods are found within each set separately, so the dimensions
/// may differ; a warning is logged when they do.
pub fn mutual_knn(control: &EmbeddingSet, rotated: &EmbeddingSet, k: usize) -> Result<f64> {
    if control.len() != rotated.len() {
        return Err(Error::Pairing(format!(
            "control has {} rows, rotated has {}",
            control.len(),
            rotated.len()
        )));
    }
    check_k(control.len(), k)?;
    if control.dim() != rotated.dim() {
        log::warn!(
            "mutual k-NN between sets of different dimension ({} vs {})",
            control.dim(),
            rotated.dim()
        );
    }
    let (a, b) = rayon::join(|| knn_indices(control, k), || knn_indices(rotated, k));
    mutual_knn_from_indices(&a?, &b?)
}

/// Mean of `1 - z_i . z'_i / (|z_i| |z'_i|)` over paired rows.
pub fn cosine_distance_mean(control: &EmbeddingSet, rotated: &EmbeddingSet) -> Result<f64> {
    if control.len() != rotated.len() || control.dim() != rotated.dim() {
        return Err(Error::Pairing(format!(
            "cosine distance needs equal shapes, got {} x {} and {} x {}",
            control.len(),
            control.dim(),
            rotated.len(),
            rotated.dim()
        )));
    }
    let terms: Vec<f64> = (0..control.len())
        .into_par_iter()
        .map(|i| cosine_term(control.row(i), rotated.row(i)).ok_or(i))
        .collect::<std::result::Result<_, usize>>()
        .map_err(|i| Error::Validation(format!("row {i} has zero norm")))?;
    let mean = compensated_sum(&terms) / terms.len() as f64;
    assert!((0.0..=2.0).contains(&mean), "cosine distance {mean} outside [0, 2]");
    Ok(mean)
}

fn cosine_term(a: &[f32], b: &[f32]) -> Option<f64> {
    let (mut dot, mut na, mut nb) = (0.0f64, 0.0f64, 0.0f64);
    for (&x, &y) in a.iter().zip(b) {
        let (x, y) = (f64::from(x), f64::from(y));
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    if na <= 0.0 || nb <= 0.0 {
        return None;
    }
    Some((1.0 - dot / (na.sqrt() * nb.sqrt())).clamp(0.0, 2.0))
}

/// Neumaier-compensated sum.
pub(crate) fn compensated_sum(values: &[f64]) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for &v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Both scores at once.
pub fn alignment(control: &EmbeddingSet, rotated: &EmbeddingSet, k: usize) -> Result<AlignmentScore> {
    let cosine_distance = cosine_distance_mean(control, rotated)?;
    let mknn = mutual_knn(control, rotated, k)?;
    Ok(AlignmentScore {
        mknn,
        cosine_distance,
        k,
        n: control.len(),
    })
}
