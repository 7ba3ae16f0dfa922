use std::fmt::Write as _;
use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::eval::{Detection, DetectionSet};
use crate::model::{ActionInstance, TextBank, TimeBase};

#[derive(Deserialize)]
struct Line {
    video_id: String,
    label: String,
    start: f64,
    end: f64,
    score: f64,
    emit: f64,
}

/// Converts instances to second-based detections. Emission time is the end
/// of the emitting timestep.
pub fn detections_from_instances(
    video_id: &str,
    instances: &[ActionInstance],
    text: &TextBank,
    time_base: TimeBase,
) -> Vec<Detection> {
    instances
        .iter()
        .map(|inst| Detection {
            video_id: video_id.to_string(),
            label: text.class_names()[inst.class_index].clone(),
            start: inst.start_sec,
            end: inst.end_sec,
            score: inst.confidence,
            emit: time_base.seconds(inst.emit_t + 1),
        })
        .collect()
}

fn json_string(s: &str) -> String {
    serde_json::to_string(s).expect("strings always serialize")
}

/// One JSON object per line, times with six decimals.
pub fn write_predictions(path: &Path, detections: &[Detection]) -> Result<()> {
    let mut out = String::new();
    for d in detections {
        if !d.score.is_finite() {
            return Err(Error::NonFinite(format!(
                "score for {} {}",
                d.video_id, d.label
            )));
        }
        writeln!(
            out,
            r#"{{"video_id":{},"label":{},"start":{:.6},"end":{:.6},"score":{},"emit":{:.6}}}"#,
            json_string(&d.video_id),
            json_string(&d.label),
            d.start,
            d.end,
            d.score,
            d.emit
        )
        .expect("writing to a String");
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

pub fn read_predictions(path: &Path) -> Result<DetectionSet> {
    let text = std::fs::read_to_string(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::NotFound(path.display().to_string()),
        _ => Error::io(path, e),
    })?;
    let mut detections = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        if raw.trim().is_empty() {
            continue;
        }
        let parse_err = |message: String| Error::Parse {
            path: path.to_path_buf(),
            line: i + 1,
            message,
        };
        let line: Line = serde_json::from_str(raw).map_err(|e| parse_err(e.to_string()))?;
        if !(line.start.is_finite() && line.end.is_finite() && line.start < line.end) {
            return Err(parse_err(format!(
                "invalid segment [{}, {}]",
                line.start, line.end
            )));
        }
        if !line.score.is_finite() {
            return Err(parse_err("non-finite score".into()));
        }
        detections.push(Detection {
            video_id: line.video_id,
            label: line.label,
            start: line.start,
            end: line.end,
            score: line.score,
            emit: line.emit,
        });
    }
    Ok(DetectionSet::new(detections))
}
