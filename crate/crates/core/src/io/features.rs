use std::path::{Component, Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{read_f32_file, read_json, write_f32_file, write_json};
use crate::error::{Error, Result};
use crate::model::FrameFeature;

pub const MANIFEST_FILE: &str = "manifest.json";
pub const MANIFEST_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub video_id: String,
    /// Relative to the manifest directory.
    pub path: String,
    pub timesteps: usize,
    pub dim: usize,
    pub fps: f64,
    pub stride: usize,
    pub window_len: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureManifest {
    pub format_version: u32,
    pub videos: Vec<ManifestEntry>,
}

impl FeatureManifest {
    pub fn new(videos: Vec<ManifestEntry>) -> Self {
        Self {
            format_version: MANIFEST_VERSION,
            videos,
        }
    }

    /// Loads `<dir>/manifest.json` and validates it.
    pub fn load(dir: &Path) -> Result<Self> {
        let path = dir.join(MANIFEST_FILE);
        if !path.exists() {
            return Err(Error::ManifestNotFound(path));
        }
        let manifest: Self = read_json(&path)?;
        manifest.validate(&path)?;
        Ok(manifest)
    }

    pub fn save(&self, dir: &Path) -> Result<()> {
        let path = dir.join(MANIFEST_FILE);
        self.validate(&path)?;
        write_json(&path, self)
    }

    pub fn dim(&self) -> Option<usize> {
        self.videos.first().map(|v| v.dim)
    }

    fn validate(&self, path: &Path) -> Result<()> {
        if self.format_version != MANIFEST_VERSION {
            return Err(Error::format(
                path,
                format!("unsupported format_version {}", self.format_version),
            ));
        }
        let dim = self.dim();
        let mut ids = std::collections::HashSet::new();
        for entry in &self.videos {
            if !ids.insert(entry.video_id.as_str()) {
                return Err(Error::format(
                    path,
                    format!("duplicate video_id {:?}", entry.video_id),
                ));
            }
            if Some(entry.dim) != dim || entry.dim == 0 {
                return Err(Error::format(
                    path,
                    format!(
                        "{}: dim {} differs from manifest dim {:?}",
                        entry.video_id, entry.dim, dim
                    ),
                ));
            }
            if !(entry.fps.is_finite() && entry.fps > 0.0)
                || entry.stride == 0
                || entry.window_len == 0
            {
                return Err(Error::format(
                    path,
                    format!(
                        "{}: fps, stride and window_len must be positive",
                        entry.video_id
                    ),
                ));
            }
            let rel = Path::new(&entry.path);
            let escapes = rel
                .components()
                .any(|c| !matches!(c, Component::Normal(_) | Component::CurDir));
            if escapes || entry.path.is_empty() {
                return Err(Error::format(
                    path,
                    format!(
                        "{}: path {:?} must stay inside the manifest directory",
                        entry.video_id, entry.path
                    ),
                ));
            }
        }
        Ok(())
    }
}

impl ManifestEntry {
    pub fn binary_path(&self, dir: &Path) -> PathBuf {
        dir.join(&self.path)
    }
}

/// Decodes a video's feature rows; row `t` becomes the feature at timestep `t`.
pub fn read_features(dir: &Path, entry: &ManifestEntry) -> Result<Vec<FrameFeature>> {
    let path = entry.binary_path(dir);
    let raw = read_f32_file(&path, entry.timesteps as u64 * entry.dim as u64)?;
    raw.chunks_exact(entry.dim)
        .enumerate()
        .map(|(t, row)| {
            FrameFeature::from_f32(t, row).map_err(|e| match e {
                Error::ZeroNorm => Error::format(&path, format!("zero-norm feature at t={t}")),
                other => other,
            })
        })
        .collect()
}

/// Writes feature rows to the entry's binary path.
pub fn write_features(dir: &Path, entry: &ManifestEntry, features: &[FrameFeature]) -> Result<()> {
    let path = entry.binary_path(dir);
    if features.len() != entry.timesteps {
        return Err(Error::format(
            &path,
            format!(
                "{} features for {} timesteps",
                features.len(),
                entry.timesteps
            ),
        ));
    }
    if let Some(bad) = features.iter().find(|f| f.dim() != entry.dim) {
        return Err(Error::DimensionMismatch {
            expected: entry.dim,
            actual: bad.dim(),
        });
    }
    write_f32_file(&path, features.iter().map(FrameFeature::values))
}
