use image::{Rgb, RgbImage};
use serde::{Deserialize, Serialize};

use super::tiles::Patch;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Interpolation {
    Nearest,
    #[default]
    Bilinear,
}

/// Counterclockwise rotation about the patch centre, in whole degrees.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RotationSpec {
    angle_degrees: u32,
    pub interpolation: Interpolation,
    /// Colour for output pixels whose source falls outside the patch.
    pub fill: Rgb<u8>,
}

impl RotationSpec {
    /// Bilinear with white fill.
    pub fn new(angle_degrees: u32) -> Result<Self> {
        if angle_degrees >= 360 {
            return Err(Error::Domain(format!(
                "rotation angle {angle_degrees} outside [0, 360)"
            )));
        }
        Ok(RotationSpec {
            angle_degrees,
            interpolation: Interpolation::Bilinear,
            fill: Rgb([255, 255, 255]),
        })
    }

    pub fn with_interpolation(mut self, interpolation: Interpolation) -> Self {
        self.interpolation = interpolation;
        self
    }

    pub fn with_fill(mut self, fill: Rgb<u8>) -> Self {
        self.fill = fill;
        self
    }

    pub fn angle_degrees(&self) -> u32 {
        self.angle_degrees
    }
}

/// Rotates `patch` counterclockwise (as displayed, y pointing down) by the
/// spec's angle, keeping its dimensions.
///
/// Multiples of 90 degrees on square patches are exact pixel permutations.
/// Every other angle inverse-maps each output pixel centre into the source;
/// pixels that land outside the source get the fill colour, so the filled
/// area lies entirely outside the inscribed circle.
pub fn rotate_patch(patch: &Patch, spec: &RotationSpec) -> Patch {
    Patch {
        pixels: rotate_image(&patch.pixels, spec),
        origin: patch.origin,
        foreground_ratio: patch.foreground_ratio,
    }
}

pub(crate) fn rotate_image(src: &RgbImage, spec: &RotationSpec) -> RgbImage {
    let (w, h) = src.dimensions();
    let square = w == h;
    match spec.angle_degrees {
        0 => src.clone(),
        180 => RgbImage::from_fn(w, h, |x, y| *src.get_pixel(w - 1 - x, h - 1 - y)),
        90 if square => RgbImage::from_fn(w, h, |x, y| *src.get_pixel(w - 1 - y, x)),
        270 if square => RgbImage::from_fn(w, h, |x, y| *src.get_pixel(y, h - 1 - x)),
        a => resample(src, f64::from(a).to_radians(), spec),
    }
}

fn resample(src: &RgbImage, theta: f64, spec: &RotationSpec) -> RgbImage {
    const EDGE: f64 = 1e-9;
    let (w, h) = src.dimensions();
    let (cx, cy) = ((f64::from(w) - 1.0) / 2.0, (f64::from(h) - 1.0) / 2.0);
    let (sin, cos) = theta.sin_cos();
    let (max_x, max_y) = (f64::from(w) - 1.0, f64::from(h) - 1.0);

    RgbImage::from_fn(w, h, |x, y| {
        let (dx, dy) = (f64::from(x) - cx, f64::from(y) - cy);
        let sx = cx + dx * cos - dy * sin;
        let sy = cy + dx * sin + dy * cos;
        if sx < -EDGE || sy < -EDGE || sx > max_x + EDGE || sy > max_y + EDGE {
            return spec.fill;
        }
        let (sx, sy) = (sx.clamp(0.0, max_x), sy.clamp(0.0, max_y));
        match spec.interpolation {
            Interpolation::Nearest => *src.get_pixel(sx.round() as u32, sy.round() as u32),
            Interpolation::Bilinear => bilinear(src, sx, sy),
        }
    })
}

fn bilinear(src: &RgbImage, sx: f64, sy: f64) -> Rgb<u8> {
    let (w, h) = src.dimensions();
    let (x0, y0) = (sx.floor() as u32, sy.floor() as u32);
    let (x1, y1) = ((x0 + 1).min(w - 1), (y0 + 1).min(h - 1));
    let (fx, fy) = (sx - f64::from(x0), sy - f64::from(y0));
    let (p00, p10, p01, p11) = (
        src.get_pixel(x0, y0).0,
        src.get_pixel(x1, y0).0,
        src.get_pixel(x0, y1).0,
        src.get_pixel(x1, y1).0,
    );
    let mut out = [0u8; 3];
    for c in 0..3 {
        let top = f64::from(p00[c]) * (1.0 - fx) + f64::from(p10[c]) * fx;
        let bottom = f64::from(p01[c]) * (1.0 - fx) + f64::from(p11[c]) * fx;
        out[c] = (top * (1.0 - fy) + bottom * fy).round().clamp(0.0, 255.0) as u8;
    }
    Rgb(out)
}
