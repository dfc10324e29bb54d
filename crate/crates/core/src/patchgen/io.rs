use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use image::RgbImage;
use serde::{Deserialize, Serialize};

use super::rotate::{rotate_patch, RotationSpec};
use super::tiles::PatchSet;
use crate::error::{Error, Result};

pub fn load_rgb(path: impl AsRef<Path>) -> Result<RgbImage> {
    let path = path.as_ref();
    match image::open(path) {
        Ok(img) => Ok(img.to_rgb8()),
        Err(image::ImageError::IoError(e)) => Err(Error::io(path, e)),
        Err(e) => Err(Error::Format(format!("{}: {e}", path.display()))),
    }
}

/// `{source_stem}_x{origin_x}_y{origin_y}_rot{angle}.png`
pub fn patch_file_name(stem: &str, origin: (u32, u32), angle: u32) -> String {
    format!("{stem}_x{}_y{}_rot{angle}.png", origin.0, origin.1)
}

/// Contents of `index.json` next to the written patches.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PatchIndex {
    pub source: String,
    pub patch_size: u32,
    pub min_foreground: f64,
    pub patches: Vec<PatchRecord>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PatchRecord {
    /// Row index this patch occupies in every embedding file derived from it.
    pub index: usize,
    pub origin_x: u32,
    pub origin_y: u32,
    pub foreground_ratio: f64,
    /// PNG file name per rotation angle.
    pub files: BTreeMap<u32, String>,
}

/// Writes each patch once per rotation in `rotations` (angle 0 is always
/// written) and an `index.json` describing them.
pub fn write_patch_set(
    set: &PatchSet,
    out_dir: &Path,
    source: &str,
    min_foreground: f64,
    rotations: &[RotationSpec],
) -> Result<PatchIndex> {
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let stem = Path::new(source)
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "patch".into());

    let identity = RotationSpec::new(0)?;
    let mut specs = vec![identity];
    specs.extend(rotations.iter().filter(|s| s.angle_degrees() != 0).copied());

    let mut records = Vec::with_capacity(set.len());
    for (index, patch) in set.patches.iter().enumerate() {
        let mut files = BTreeMap::new();
        for spec in &specs {
            let name = patch_file_name(&stem, patch.origin, spec.angle_degrees());
            let rotated = rotate_patch(patch, spec);
            let path = out_dir.join(&name);
            rotated.pixels.save(&path).map_err(|e| match e {
                image::ImageError::IoError(io) => Error::io(&path, io),
                other => Error::Format(format!("{}: {other}", path.display())),
            })?;
            files.insert(spec.angle_degrees(), name);
        }
        records.push(PatchRecord {
            index,
            origin_x: patch.origin.0,
            origin_y: patch.origin.1,
            foreground_ratio: patch.foreground_ratio,
            files,
        });
    }
    let index = PatchIndex {
        source: source.to_string(),
        patch_size: set.patch_size,
        min_foreground,
        patches: records,
    };
    let path = out_dir.join("index.json");
    let mut text = serde_json::to_string_pretty(&index)?;
    text.push('\n');
    fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    Ok(index)
}
