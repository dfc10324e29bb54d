use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One model under test: its augmentation flag and one embedding file per angle.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub model_name: String,
    pub rotation_augmented: bool,
    pub embedding_paths: BTreeMap<u32, PathBuf>,
}

impl ManifestEntry {
    pub fn path_for(&self, angle: u32) -> Result<&Path> {
        self.embedding_paths
            .get(&angle)
            .map(PathBuf::as_path)
            .ok_or_else(|| Error::IncompleteManifest {
                model: self.model_name.clone(),
                angle,
            })
    }
}

/// The experiment manifest, stored as JSON:
///
/// ```json
/// {"entries": [{"model_name": "a", "rotation_augmented": true,
///               "embedding_paths": {"0": "a_angle0.emb", "15": "a_angle15.emb"}}]}
/// ```
///
/// Relative paths are resolved against the manifest's directory on load.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelManifest {
    pub entries: Vec<ManifestEntry>,
}

impl ModelManifest {
    /// Parses, resolves paths, and checks every invariant including that each
    /// referenced file exists.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().unwrap_or_else(|| Path::new(""));
        let manifest = Self::from_json(&text, base)?;
        manifest.check_files()?;
        Ok(manifest)
    }

    /// Parses and checks structure without touching the filesystem.
    pub fn from_json(text: &str, base_dir: &Path) -> Result<Self> {
        let mut manifest: ModelManifest = serde_json::from_str(text)?;
        for entry in &mut manifest.entries {
            for p in entry.embedding_paths.values_mut() {
                if p.is_relative() {
                    *p = base_dir.join(&*p);
                }
            }
        }
        manifest.check_structure()?;
        Ok(manifest)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn check_structure(&self) -> Result<()> {
        let mut seen = HashSet::new();
        for entry in &self.entries {
            if !seen.insert(entry.model_name.as_str()) {
                return Err(Error::Validation(format!(
                    "model name {:?} appears more than once",
                    entry.model_name
                )));
            }
            if !entry.embedding_paths.contains_key(&0) {
                return Err(Error::IncompleteManifest {
                    model: entry.model_name.clone(),
                    angle: 0,
                });
            }
            if let Some(&bad) = entry.embedding_paths.keys().find(|&&a| a >= 360) {
                return Err(Error::Validation(format!(
                    "model {} lists angle {bad} outside [0, 360)",
                    entry.model_name
                )));
            }
        }
        Ok(())
    }

    pub fn check_files(&self) -> Result<()> {
        for entry in &self.entries {
            for (angle, p) in &entry.embedding_paths {
                if !p.is_file() {
                    return Err(Error::Validation(format!(
                        "model {} angle {angle}: embedding file not found: {}",
                        entry.model_name,
                        p.display()
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn entry(&self, model: &str) -> Option<&ManifestEntry> {
        self.entries.iter().find(|e| e.model_name == model)
    }
}
