use serde::{Deserialize, Serialize};

use super::segment::ForegroundMask;

/// Axis-aligned pixel rectangle, `x..x+width` by `y..y+height`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BoundingBox {
    pub x: u32,
    pub y: u32,
    pub width: u32,
    pub height: u32,
}

impl BoundingBox {
    pub fn new(x: u32, y: u32, width: u32, height: u32) -> Self {
        BoundingBox { x, y, width, height }
    }
}

/// One 8-connected foreground component.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Region {
    pub bbox: BoundingBox,
    /// Pixel count.
    pub area: usize,
}

/// All 8-connected foreground components, in raster order of their first pixel.
pub fn connected_regions(mask: &ForegroundMask) -> Vec<Region> {
    let (w, h) = (mask.width() as usize, mask.height() as usize);
    let bits = mask.bits();
    let mut seen = vec![false; bits.len()];
    let mut stack = Vec::new();
    let mut regions = Vec::new();

    for start in 0..bits.len() {
        if !bits[start] || seen[start] {
            continue;
        }
        seen[start] = true;
        stack.push(start);
        let (mut x0, mut y0, mut x1, mut y1) = (usize::MAX, usize::MAX, 0, 0);
        let mut area = 0;
        while let Some(p) = stack.pop() {
            let (x, y) = (p % w, p / w);
            area += 1;
            x0 = x0.min(x);
            y0 = y0.min(y);
            x1 = x1.max(x);
            y1 = y1.max(y);
            for ny in y.saturating_sub(1)..=(y + 1).min(h - 1) {
                for nx in x.saturating_sub(1)..=(x + 1).min(w - 1) {
                    let q = ny * w + nx;
                    if bits[q] && !seen[q] {
                        seen[q] = true;
                        stack.push(q);
                    }
                }
            }
        }
        regions.push(Region {
            bbox: BoundingBox::new(x0 as u32, y0 as u32, (x1 - x0 + 1) as u32, (y1 - y0 + 1) as u32),
            area,
        });
    }
    regions
}

/// Bounding boxes of the `count` largest components by area, largest first.
/// Equal areas are ordered top-to-bottom, then left-to-right.
pub fn largest_regions(mask: &ForegroundMask, count: usize) -> Vec<BoundingBox> {
    let mut regions = connected_regions(mask);
    regions.sort_by(|a, b| {
        b.area
            .cmp(&a.area)
            .then(a.bbox.y.cmp(&b.bbox.y))
            .then(a.bbox.x.cmp(&b.bbox.x))
    });
    regions.into_iter().take(count).map(|r| r.bbox).collect()
}
