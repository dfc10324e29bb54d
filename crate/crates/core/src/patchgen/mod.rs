//! Patch extraction from plain RGB rasters and the rotation operator.
//!
//! The pipeline is `segment_foreground` (HSV threshold plus morphological
//! clean-up) → `largest_regions` (connected components ranked by area) →
//! `extract_patches` (non-overlapping tiles inside each region's bounding
//! box, kept when enough of the tile is foreground). `rotate_patch` turns a
//! patch about its centre with fixed output size.

mod io;
mod regions;
mod rotate;
mod segment;
mod tiles;

pub use io::{load_rgb, patch_file_name, write_patch_set, PatchIndex, PatchRecord};
pub use regions::{connected_regions, largest_regions, BoundingBox, Region};
pub use rotate::{rotate_patch, Interpolation, RotationSpec};
pub use segment::{segment_foreground, ForegroundMask, HsvChannel, SegmentConfig, Threshold};
pub use tiles::{extract_patches, Patch, PatchSet, TileConfig};

pub use image::{Rgb, RgbImage};

/// Default square patch edge in pixels.
pub const DEFAULT_PATCH_SIZE: u32 = 256;
/// Minimum foreground fraction for a tile to be kept.
pub const DEFAULT_MIN_FOREGROUND: f64 = 0.75;
/// Number of regions tiled per image.
pub const DEFAULT_REGION_COUNT: usize = 5;
