use image::RgbImage;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which HSV quantity scores a pixel as tissue. Higher score means more
/// likely foreground.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HsvChannel {
    /// `S = (max - min) / max`, scaled to `0..=255`.
    #[default]
    Saturation,
    /// Darkness, `255 - V` with `V = max(R, G, B)`.
    Value,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Threshold {
    #[default]
    Otsu,
    /// Foreground iff score > the given level.
    Fixed(u8),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SegmentConfig {
    pub channel: HsvChannel,
    pub threshold: Threshold,
    /// Rounds of 3x3 opening followed by the same number of closing; 0 disables.
    pub morphology_iterations: usize,
}

impl Default for SegmentConfig {
    fn default() -> Self {
        SegmentConfig {
            channel: HsvChannel::Saturation,
            threshold: Threshold::Otsu,
            morphology_iterations: 1,
        }
    }
}

/// Per-pixel tissue flags with the source image's dimensions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ForegroundMask {
    width: u32,
    height: u32,
    bits: Vec<bool>,
}

impl ForegroundMask {
    pub fn new(width: u32, height: u32) -> Self {
        ForegroundMask {
            width,
            height,
            bits: vec![false; width as usize * height as usize],
        }
    }

    pub fn from_fn(width: u32, height: u32, f: impl Fn(u32, u32) -> bool) -> Self {
        let mut bits = Vec::with_capacity(width as usize * height as usize);
        for y in 0..height {
            for x in 0..width {
                bits.push(f(x, y));
            }
        }
        ForegroundMask { width, height, bits }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn get(&self, x: u32, y: u32) -> bool {
        self.bits[y as usize * self.width as usize + x as usize]
    }

    pub fn set(&mut self, x: u32, y: u32, value: bool) {
        self.bits[y as usize * self.width as usize + x as usize] = value;
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub(crate) fn bits(&self) -> &[bool] {
        &self.bits
    }
}

fn score(px: [u8; 3], channel: HsvChannel) -> u8 {
    let max = px.iter().copied().max().unwrap();
    match channel {
        HsvChannel::Saturation => {
            if max == 0 {
                0
            } else {
                let min = px.iter().copied().min().unwrap();
                ((f64::from(max - min) * 255.0 / f64::from(max)).round()) as u8
            }
        }
        HsvChannel::Value => 255 - max,
    }
}

/// Otsu's threshold over a 256-bin histogram: the level `t` maximising the
/// between-class variance of `{<= t}` and `{> t}`. `None` when every pixel
/// falls in one bin.
pub(crate) fn otsu_level(hist: &[u64; 256]) -> Option<u8> {
    let total: u64 = hist.iter().sum();
    if hist.iter().filter(|&&c| c > 0).count() < 2 {
        return None;
    }
    let total_f = total as f64;
    let sum_all: f64 = hist.iter().enumerate().map(|(i, &c)| i as f64 * c as f64).sum();
    let (mut w0, mut sum0) = (0.0f64, 0.0f64);
    let (mut best, mut best_var) = (0u8, -1.0f64);
    for (t, &c) in hist.iter().enumerate().take(255) {
        w0 += c as f64;
        sum0 += t as f64 * c as f64;
        let w1 = total_f - w0;
        if w0 == 0.0 || w1 == 0.0 {
            continue;
        }
        let m0 = sum0 / w0;
        let m1 = (sum_all - sum0) / w1;
        let var = w0 * w1 * (m0 - m1) * (m0 - m1);
        if var > best_var {
            best_var = var;
            best = t as u8;
        }
    }
    Some(best)
}

/// Thresholds an HSV channel and cleans the result with 3x3 open-then-close.
///
/// When Otsu has nothing to separate (a single-valued channel) the whole
/// image is foreground if the mean score is at least half the range, and
/// background otherwise.
pub fn segment_foreground(image: &RgbImage, config: &SegmentConfig) -> Result<ForegroundMask> {
    let (width, height) = image.dimensions();
    if width == 0 || height == 0 {
        return Err(Error::Domain("cannot segment an empty image".into()));
    }
    let scores: Vec<u8> = image.pixels().map(|p| score(p.0, config.channel)).collect();

    let level = match config.threshold {
        Threshold::Fixed(t) => Some(t),
        Threshold::Otsu => {
            let mut hist = [0u64; 256];
            for &s in &scores {
                hist[s as usize] += 1;
            }
            otsu_level(&hist)
        }
    };
    let bits = match level {
        Some(t) => scores.iter().map(|&s| s > t).collect(),
        None => {
            let mean = scores.iter().map(|&s| f64::from(s)).sum::<f64>() / scores.len() as f64;
            vec![mean >= 127.5; scores.len()]
        }
    };
    let mut mask = ForegroundMask { width, height, bits };
    let n = config.morphology_iterations;
    if n > 0 {
        mask = open(&mask, n);
        mask = close(&mask, n);
    }
    Ok(mask)
}

// 3x3 min/max over in-bounds neighbours, done as separable row and column passes.
fn morph(mask: &ForegroundMask, erode: bool) -> ForegroundMask {
    let (w, h) = (mask.width as usize, mask.height as usize);
    let pick = |a: bool, b: bool| if erode { a && b } else { a || b };
    let src = &mask.bits;
    let mut rows = vec![false; src.len()];
    for y in 0..h {
        for x in 0..w {
            let mut v = src[y * w + x];
            if x > 0 {
                v = pick(v, src[y * w + x - 1]);
            }
            if x + 1 < w {
                v = pick(v, src[y * w + x + 1]);
            }
            rows[y * w + x] = v;
        }
    }
    let mut out = vec![false; src.len()];
    for y in 0..h {
        for x in 0..w {
            let mut v = rows[y * w + x];
            if y > 0 {
                v = pick(v, rows[(y - 1) * w + x]);
            }
            if y + 1 < h {
                v = pick(v, rows[(y + 1) * w + x]);
            }
            out[y * w + x] = v;
        }
    }
    ForegroundMask {
        width: mask.width,
        height: mask.height,
        bits: out,
    }
}

fn open(mask: &ForegroundMask, n: usize) -> ForegroundMask {
    let mut m = mask.clone();
    for _ in 0..n {
        m = morph(&m, true);
    }
    for _ in 0..n {
        m = morph(&m, false);
    }
    m
}

fn close(mask: &ForegroundMask, n: usize) -> ForegroundMask {
    let mut m = mask.clone();
    for _ in 0..n {
        m = morph(&m, false);
    }
    for _ in 0..n {
        m = morph(&m, true);
    }
    m
}
