//! Seeded synthetic embeddings for tests and demos.
//!
//! All draws come from ChaCha8 seeded through `seed_from_u64`, whose output
//! stream is fixed across platforms, followed by `StandardNormal`.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{EmbeddingMeta, EmbeddingSet};
use crate::error::{Error, Result};

fn check_sigma(noise_sigma: f64) -> Result<()> {
    if !(noise_sigma.is_finite() && noise_sigma >= 0.0) {
        return Err(Error::Domain(format!(
            "noise sigma must be finite and nonnegative, got {noise_sigma}"
        )));
    }
    Ok(())
}

fn draw_control(n: usize, dim: usize, rng: &mut ChaCha8Rng) -> Result<EmbeddingSet> {
    if n < 2 {
        return Err(Error::Domain(format!("need at least 2 rows, got {n}")));
    }
    if dim < 1 {
        return Err(Error::Domain("dimension must be at least 1".into()));
    }
    let data = (0..n * dim)
        .map(|_| rng.sample::<f64, _>(StandardNormal) as f32)
        .collect();
    EmbeddingSet::new(data, n, dim, EmbeddingMeta::new("synthetic", 0))
}

fn perturb_with(control: &EmbeddingSet, noise_sigma: f64, rng: &mut ChaCha8Rng) -> Result<EmbeddingSet> {
    check_sigma(noise_sigma)?;
    let data = if noise_sigma == 0.0 {
        control.as_slice().to_vec()
    } else {
        control
            .as_slice()
            .iter()
            .map(|&z| {
                let eps: f64 = rng.sample(StandardNormal);
                (f64::from(z) + noise_sigma * eps) as f32
            })
            .collect()
    };
    EmbeddingSet::new(data, control.len(), control.dim(), control.meta().clone())
}

/// `N x d` standard-normal control set.
pub fn synthesize_control(n: usize, dim: usize, seed: u64) -> Result<EmbeddingSet> {
    draw_control(n, dim, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// Adds independent `Normal(0, sigma^2)` noise to every coordinate of `control`.
pub fn perturb(control: &EmbeddingSet, noise_sigma: f64, seed: u64) -> Result<EmbeddingSet> {
    perturb_with(control, noise_sigma, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// Returns `(Z, Z')` with `Z` standard normal and `Z' = Z + noise`.
///
/// Both are drawn from one stream, control first, so `Z` depends only on
/// `(n, dim, seed)` and changing `noise_sigma` only rescales the same noise.
pub fn synthesize_pair(n: usize, dim: usize, noise_sigma: f64, seed: u64) -> Result<(EmbeddingSet, EmbeddingSet)> {
    check_sigma(noise_sigma)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let control = draw_control(n, dim, &mut rng)?;
    let rotated = perturb_with(&control, noise_sigma, &mut rng)?;
    Ok((control, rotated))
}
