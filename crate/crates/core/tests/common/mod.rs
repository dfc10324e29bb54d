#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rotalign::{EmbeddingMeta, EmbeddingSet};

/// Neighbour lists by full sort of every pairwise distance.
pub fn naive_knn(rows: &[Vec<f32>], k: usize) -> Vec<Vec<usize>> {
    let n = rows.len();
    (0..n)
        .map(|i| {
            let mut all: Vec<(f64, usize)> = (0..n)
                .filter(|&j| j != i)
                .map(|j| {
                    let mut s = 0.0f64;
                    for (x, y) in rows[i].iter().zip(&rows[j]) {
                        let d = f64::from(*x) - f64::from(*y);
                        s += d * d;
                    }
                    (s, j)
                })
                .collect();
            all.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
            all.into_iter().take(k).map(|(_, j)| j).collect()
        })
        .collect()
}

pub fn naive_mknn(a: &[Vec<f32>], b: &[Vec<f32>], k: usize) -> f64 {
    let na = naive_knn(a, k);
    let nb = naive_knn(b, k);
    let shared: usize = na
        .iter()
        .zip(&nb)
        .map(|(x, y)| x.iter().filter(|j| y.contains(j)).count())
        .sum();
    shared as f64 / (a.len() * k) as f64
}

pub fn naive_cosine(a: &[Vec<f32>], b: &[Vec<f32>]) -> f64 {
    let mut total = 0.0f64;
    for (x, y) in a.iter().zip(b) {
        let dot: f64 = x.iter().zip(y).map(|(p, q)| f64::from(*p) * f64::from(*q)).sum();
        let nx: f64 = x.iter().map(|p| f64::from(*p).powi(2)).sum::<f64>().sqrt();
        let ny: f64 = y.iter().map(|q| f64::from(*q).powi(2)).sum::<f64>().sqrt();
        total += 1.0 - dot / (nx * ny);
    }
    total / a.len() as f64
}

pub fn set(rows: &[Vec<f32>]) -> EmbeddingSet {
    EmbeddingSet::from_rows(rows, EmbeddingMeta::new("t", 0)).unwrap()
}

pub fn rows_of(set: &EmbeddingSet) -> Vec<Vec<f32>> {
    set.rows().map(<[f32]>::to_vec).collect()
}

/// Random rows; with `lattice` the entries are small positive integers so
/// that distance ties are common.
pub fn random_rows(rng: &mut ChaCha8Rng, n: usize, d: usize, lattice: bool) -> Vec<Vec<f32>> {
    (0..n)
        .map(|_| {
            (0..d)
                .map(|_| {
                    if lattice {
                        rng.random_range(1..=4) as f32
                    } else {
                        rng.random_range(-1.0f32..1.0)
                    }
                })
                .collect()
        })
        .collect()
}

/// A single oracle-comparison instance: `(N, d, k, control, rotated)`.
pub fn oracle_instance(seed: u64) -> (usize, usize, usize, Vec<Vec<f32>>, Vec<Vec<f32>>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(3..=64);
    let d = rng.random_range(1..=8);
    let k = rng.random_range(1..=8.min(n - 1));
    let lattice = seed.is_multiple_of(3);
    let a = random_rows(&mut rng, n, d, lattice);
    let b = random_rows(&mut rng, n, d, lattice);
    (n, d, k, a, b)
}

/// The 1-D hand cases, shifted away from the origin; a common shift keeps
/// every distance and so every neighbour list unchanged.
pub fn shifted(values: &[f32]) -> Vec<Vec<f32>> {
    values.iter().map(|v| vec![v + 100.0]).collect()
}

/// Path of the built `rotalign` binary.
pub fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_rotalign")
}

/// A white 768x768 canvas with a saturated 512x512 square at (64, 64).
pub fn saturated_square_png(path: &std::path::Path) {
    let mut img = image::RgbImage::from_pixel(768, 768, image::Rgb([255, 255, 255]));
    for y in 64..576 {
        for x in 64..576 {
            img.put_pixel(x, y, image::Rgb([220, 20, 60]));
        }
    }
    img.save(path).unwrap();
}

/// `(t, df, sf)` rows of the high-precision survival-function table.
pub fn t_sf_fixture() -> Vec<(f64, f64, f64)> {
    let text = include_str!("../data/t_sf_oracle.csv");
    let mut r = csv::Reader::from_reader(text.as_bytes());
    r.deserialize().map(|row| row.unwrap()).collect()
}

/// Student t statistic for `[1,2,3]` vs `[2,3,4]`, and its two-tailed p
/// from the high-precision table generator.
pub const PINNED_T: f64 = -1.224_744_871_391_589;
pub const PINNED_P: f64 = 0.287_864_134_726_690_7;

/// Runs the synthetic writer and returns the manifest path.
pub fn synth(dir: &std::path::Path, n: usize, d: usize, models: &[&str], seed: u64) -> std::path::PathBuf {
    rotalign::report::cmd_synth(&rotalign::report::SynthConfig {
        out_dir: dir.to_path_buf(),
        n,
        dim: d,
        models: models.iter().map(|m| m.parse().unwrap()).collect(),
        grid: rotalign::AngleGrid::default(),
        seed,
    })
    .unwrap()
}

/// Default segmentation, the five largest regions, default tiling.
pub fn default_patches(img: &image::RgbImage) -> rotalign::patchgen::PatchSet {
    use rotalign::patchgen::*;
    let mask = segment_foreground(img, &SegmentConfig::default()).unwrap();
    let boxes = largest_regions(&mask, DEFAULT_REGION_COUNT);
    extract_patches(img, &mask, &boxes, &TileConfig::default()).unwrap()
}

/// A patch of random colours, none of them white.
pub fn textured_patch(size: u32, seed: u64) -> rotalign::patchgen::Patch {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pixels = image::RgbImage::from_fn(size, size, |_, _| {
        image::Rgb([
            rng.random_range(0..200),
            rng.random_range(0..200),
            rng.random_range(0..200),
        ])
    });
    rotalign::patchgen::Patch {
        pixels,
        origin: (0, 0),
        foreground_ratio: 1.0,
    }
}

/// Counts fill-coloured pixels inside and outside the inscribed circle.
pub fn fill_split(img: &image::RgbImage, fill: image::Rgb<u8>) -> (usize, usize) {
    let c = (f64::from(img.width()) - 1.0) / 2.0;
    let r = c;
    let (mut inside, mut outside) = (0, 0);
    for (x, y, p) in img.enumerate_pixels() {
        if *p != fill {
            continue;
        }
        let (dx, dy) = (f64::from(x) - c, f64::from(y) - c);
        if dx * dx + dy * dy <= r * r {
            inside += 1;
        } else {
            outside += 1;
        }
    }
    (inside, outside)
}
