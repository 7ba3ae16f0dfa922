use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{read_json, write_json};
use crate::error::{Error, Result};
use crate::eval::{GroundTruthSegment, GroundTruthSet, VideoAnnotations};

/// Out-of-range segment ends within this many seconds are clamped.
const CLAMP_TOLERANCE: f64 = 0.1;

#[derive(Debug, Serialize, Deserialize)]
struct RawAnnotation {
    label: String,
    segment: [f64; 2],
}

#[derive(Debug, Serialize, Deserialize)]
struct RawVideo {
    duration: f64,
    annotations: Vec<RawAnnotation>,
}

/// Loads ActivityNet-style annotations. A top-level `database` wrapper, as in
/// the official release files, is unwrapped.
pub fn load_annotations(path: &Path) -> Result<GroundTruthSet> {
    let mut value: serde_json::Value = read_json(path)?;
    if let Some(db) = value.get_mut("database") {
        value = db.take();
    }
    let raw: BTreeMap<String, RawVideo> =
        serde_json::from_value(value).map_err(|e| Error::format(path, e.to_string()))?;

    let mut gt = GroundTruthSet::new();
    for (video_id, video) in raw {
        if !(video.duration.is_finite() && video.duration > 0.0) {
            return Err(Error::format(
                path,
                format!("{video_id}: duration must be positive"),
            ));
        }
        let mut segments = Vec::with_capacity(video.annotations.len());
        for (i, ann) in video.annotations.into_iter().enumerate() {
            let [mut start, mut end] = ann.segment;
            if !(start.is_finite() && end.is_finite()) || start >= end {
                return Err(Error::format(
                    path,
                    format!("{video_id} annotation {i}: start {start} must be before end {end}"),
                ));
            }
            if start < 0.0 || end > video.duration {
                let overshoot = (-start).max(end - video.duration);
                if overshoot >= CLAMP_TOLERANCE {
                    return Err(Error::format(
                        path,
                        format!(
                            "{video_id} annotation {i}: [{start}, {end}] outside [0, {}]",
                            video.duration
                        ),
                    ));
                }
                log::warn!(
                    "{video_id} annotation {i}: clamping [{start}, {end}] to [0, {}]",
                    video.duration
                );
                start = start.max(0.0);
                end = end.min(video.duration);
                if start >= end {
                    return Err(Error::format(
                        path,
                        format!("{video_id} annotation {i}: empty after clamping"),
                    ));
                }
            }
            segments.push(GroundTruthSegment {
                start,
                end,
                label: ann.label,
            });
        }
        gt.insert(
            video_id,
            VideoAnnotations {
                duration: video.duration,
                segments,
            },
        )?;
    }
    Ok(gt)
}

pub fn write_annotations(path: &Path, gt: &GroundTruthSet) -> Result<()> {
    let raw: BTreeMap<&str, RawVideo> = gt
        .videos()
        .iter()
        .map(|(id, v)| {
            (
                id.as_str(),
                RawVideo {
                    duration: v.duration,
                    annotations: v
                        .segments
                        .iter()
                        .map(|s| RawAnnotation {
                            label: s.label.clone(),
                            segment: [s.start, s.end],
                        })
                        .collect(),
                },
            )
        })
        .collect();
    write_json(path, &raw)
}
