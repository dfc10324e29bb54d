use image::{imageops, RgbImage};

use super::regions::BoundingBox;
use super::segment::ForegroundMask;
use crate::error::{Error, Result};

/// A square crop of the source image.
#[derive(Clone, Debug, PartialEq)]
pub struct Patch {
    pub pixels: RgbImage,
    /// Top-left corner in the source image.
    pub origin: (u32, u32),
    pub foreground_ratio: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct PatchSet {
    pub patch_size: u32,
    pub patches: Vec<Patch>,
}

impl PatchSet {
    pub fn len(&self) -> usize {
        self.patches.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patches.is_empty()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TileConfig {
    pub patch_size: u32,
    pub min_foreground: f64,
}

impl Default for TileConfig {
    fn default() -> Self {
        TileConfig {
            patch_size: super::DEFAULT_PATCH_SIZE,
            min_foreground: super::DEFAULT_MIN_FOREGROUND,
        }
    }
}

impl TileConfig {
    pub fn validate(&self) -> Result<()> {
        if self.patch_size == 0 {
            return Err(Error::Domain("patch size must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.min_foreground) {
            return Err(Error::Domain(format!(
                "minimum foreground fraction must lie in [0, 1], got {}",
                self.min_foreground
            )));
        }
        Ok(())
    }
}

/// Summed-area table with a zero first row and column.
struct Integral {
    width: usize,
    sums: Vec<u64>,
}

impl Integral {
    fn new(mask: &ForegroundMask) -> Self {
        let (w, h) = (mask.width() as usize, mask.height() as usize);
        let stride = w + 1;
        let mut sums = vec![0u64; stride * (h + 1)];
        let bits = mask.bits();
        for y in 0..h {
            let mut row = 0u64;
            for x in 0..w {
                row += u64::from(bits[y * w + x]);
                sums[(y + 1) * stride + x + 1] = sums[y * stride + x + 1] + row;
            }
        }
        Integral { width: stride, sums }
    }

    fn count(&self, x: u32, y: u32, size: u32) -> u64 {
        let (x0, y0) = (x as usize, y as usize);
        let (x1, y1) = (x0 + size as usize, y0 + size as usize);
        let s = |x: usize, y: usize| self.sums[y * self.width + x];
        s(x1, y1) + s(x0, y0) - s(x0, y1) - s(x1, y0)
    }
}

/// Tiles each box on a stride-`patch_size` grid anchored at its top-left
/// corner. Tiles that would cross the box or image edge are skipped; a tile
/// is kept when its foreground fraction reaches `min_foreground`.
pub fn extract_patches(
    image: &RgbImage,
    mask: &ForegroundMask,
    boxes: &[BoundingBox],
    config: &TileConfig,
) -> Result<PatchSet> {
    config.validate()?;
    if image.dimensions() != (mask.width(), mask.height()) {
        return Err(Error::Validation(format!(
            "mask is {}x{} but image is {}x{}",
            mask.width(),
            mask.height(),
            image.width(),
            image.height()
        )));
    }
    let size = config.patch_size;
    let area = f64::from(size) * f64::from(size);
    let integral = Integral::new(mask);
    let (img_w, img_h) = image.dimensions();
    let mut patches = Vec::new();

    for b in boxes {
        let right = (u64::from(b.x) + u64::from(b.width)).min(u64::from(img_w));
        let bottom = (u64::from(b.y) + u64::from(b.height)).min(u64::from(img_h));
        let mut y = b.y;
        while u64::from(y) + u64::from(size) <= bottom {
            let mut x = b.x;
            while u64::from(x) + u64::from(size) <= right {
                let fg = integral.count(x, y, size);
                let ratio = fg as f64 / area;
                if ratio >= config.min_foreground {
                    debug_assert!(fg as f64 >= config.min_foreground * area);
                    patches.push(Patch {
                        pixels: imageops::crop_imm(image, x, y, size, size).to_image(),
                        origin: (x, y),
                        foreground_ratio: ratio,
                    });
                }
                x += size;
            }
            y += size;
        }
    }
    Ok(PatchSet {
        patch_size: size,
        patches,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use image::Rgb;

    fn setup(w: u32, h: u32, fg: impl Fn(u32, u32) -> bool) -> (RgbImage, ForegroundMask) {
        let mask = ForegroundMask::from_fn(w, h, &fg);
        let img = RgbImage::from_fn(w, h, |x, y| {
            if fg(x, y) {
                Rgb([150, 30, 120])
            } else {
                Rgb([255, 255, 255])
            }
        });
        (img, mask)
    }

    #[test]
    fn full_box_gives_four() {
        let (img, mask) = setup(512, 512, |_, _| true);
        let set = extract_patches(&img, &mask, &[BoundingBox::new(0, 0, 512, 512)], &TileConfig::default()).unwrap();
        assert_eq!(set.len(), 4);
        let origins: Vec<_> = set.patches.iter().map(|p| p.origin).collect();
        assert_eq!(origins, vec![(0, 0), (256, 0), (0, 256), (256, 256)]);
        assert!(set.patches.iter().all(|p| p.pixels.dimensions() == (256, 256)));
    }

    #[test]
    fn right_half_background_gives_left_column() {
        let (img, mask) = setup(512, 512, |x, _| x < 256);
        let set = extract_patches(&img, &mask, &[BoundingBox::new(0, 0, 512, 512)], &TileConfig::default()).unwrap();
        let origins: Vec<_> = set.patches.iter().map(|p| p.origin).collect();
        assert_eq!(origins, vec![(0, 0), (0, 256)]);
    }

    #[test]
    fn zero_threshold_keeps_all_grid_tiles() {
        let (img, mask) = setup(600, 300, |_, _| false);
        let cfg = TileConfig {
            patch_size: 100,
            min_foreground: 0.0,
        };
        let set = extract_patches(&img, &mask, &[BoundingBox::new(10, 10, 550, 250)], &cfg).unwrap();
        assert_eq!(set.len(), 5 * 2);
    }

    #[test]
    fn threshold_boundary_is_inclusive() {
        // exactly 75% foreground: 3 of 4 quadrants of a 4x4 tile
        let (img, mask) = setup(4, 4, |x, y| !(x >= 2 && y >= 2));
        let cfg = TileConfig {
            patch_size: 4,
            min_foreground: 0.75,
        };
        let set = extract_patches(&img, &mask, &[BoundingBox::new(0, 0, 4, 4)], &cfg).unwrap();
        assert_eq!(set.len(), 1);
        assert_eq!(set.patches[0].foreground_ratio, 0.75);
    }

    #[test]
    fn box_smaller_than_patch_yields_nothing() {
        let (img, mask) = setup(300, 300, |_, _| true);
        let set = extract_patches(&img, &mask, &[BoundingBox::new(0, 0, 255, 300)], &TileConfig::default()).unwrap();
        assert!(set.is_empty());
    }

    #[test]
    fn box_clipped_to_image() {
        let (img, mask) = setup(300, 300, |_, _| true);
        let set = extract_patches(
            &img,
            &mask,
            &[BoundingBox::new(50, 50, 1000, 1000)],
            &TileConfig::default(),
        )
        .unwrap();
        assert!(set.is_empty());
        let set = extract_patches(
            &img,
            &mask,
            &[BoundingBox::new(44, 0, 1000, 1000)],
            &TileConfig::default(),
        )
        .unwrap();
        assert_eq!(set.len(), 1);
    }

    #[test]
    fn invalid_config() {
        let (img, mask) = setup(4, 4, |_, _| true);
        let bad = TileConfig {
            patch_size: 2,
            min_foreground: 1.1,
        };
        assert!(extract_patches(&img, &mask, &[], &bad).is_err());
        let bad = TileConfig {
            patch_size: 0,
            min_foreground: 0.5,
        };
        assert!(extract_patches(&img, &mask, &[], &bad).is_err());
    }

    #[test]
    fn pixels_are_copied_from_origin() {
        let img = RgbImage::from_fn(8, 8, |x, y| Rgb([x as u8, y as u8, 7]));
        let mask = ForegroundMask::from_fn(8, 8, |_, _| true);
        let cfg = TileConfig {
            patch_size: 4,
            min_foreground: 1.0,
        };
        let set = extract_patches(&img, &mask, &[BoundingBox::new(4, 0, 4, 8)], &cfg).unwrap();
        assert_eq!(set.len(), 2);
        assert_eq!(set.patches[1].origin, (4, 4));
        assert_eq!(set.patches[1].pixels.get_pixel(1, 2).0, [5, 6, 7]);
    }
}
