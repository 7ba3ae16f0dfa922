//! On-disk formats.
//!
//! Matrices are raw row-major little-endian `f32`; metadata is JSON.
//!
//! | file | contents |
//! |------|----------|
//! | `manifest.json` | feature manifest, one entry per video |
//! | `<video>.bin` | `T x D` feature rows |
//! | `<prefix>.json` | class names and descriptions, foreground/background prompts |
//! | `<prefix>.bin` | `(K + 2) x D` rows: classes, foreground, background |
//! | annotations | `{video_id: {duration, annotations: [{label, segment: [s, e]}]}}` |
//! | predictions | JSON lines `{video_id, label, start, end, score, emit}` |

mod annotations;
mod features;
mod predictions;
mod textbank;

use std::fs::File;
use std::io::Read;
use std::path::Path;

pub use annotations::{load_annotations, write_annotations};
pub use features::{
    read_features, write_features, FeatureManifest, ManifestEntry, MANIFEST_FILE, MANIFEST_VERSION,
};
pub use predictions::{detections_from_instances, read_predictions, write_predictions};
pub use textbank::{load_textbank, textbank_paths, write_textbank, TextBankClass, TextBankMeta};

use crate::error::{Error, Result};

/// Reads a little-endian `f32` matrix after checking the file holds exactly
/// `expected_values` floats.
pub(crate) fn read_f32_file(path: &Path, expected_values: u64) -> Result<Vec<f32>> {
    let mut file = File::open(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::NotFound(path.display().to_string()),
        _ => Error::io(path, e),
    })?;
    let actual = file.metadata().map_err(|e| Error::io(path, e))?.len();
    let expected = expected_values * 4;
    if actual != expected {
        return Err(Error::SizeMismatch {
            path: path.to_path_buf(),
            expected,
            actual,
        });
    }
    let mut bytes = Vec::with_capacity(expected as usize);
    file.read_to_end(&mut bytes)
        .map_err(|e| Error::io(path, e))?;
    Ok(bytes
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
        .collect())
}

pub(crate) fn write_f32_file<'a>(
    path: &Path,
    rows: impl IntoIterator<Item = &'a [f64]>,
) -> Result<()> {
    let mut bytes = Vec::new();
    for row in rows {
        for &v in row {
            bytes.extend_from_slice(&(v as f32).to_le_bytes());
        }
    }
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub(crate) fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::NotFound(path.display().to_string()),
        _ => Error::io(path, e),
    })?;
    serde_json::from_str(&text).map_err(|e| Error::format(path, e.to_string()))
}

pub(crate) fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text =
        serde_json::to_string_pretty(value).map_err(|e| Error::format(path, e.to_string()))?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}
