//! Detection mAP at temporal IoU thresholds.
//!
//! Per class and threshold, predictions are ranked by score and greedily
//! matched one-to-one to ground truth in the same video. AP is the sum of
//! precision at each true positive divided by the number of ground-truth
//! instances.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::Serialize;

use crate::error::{Error, Result};

pub const THUMOS14_TIOU: [f64; 5] = [0.3, 0.4, 0.5, 0.6, 0.7];
pub const ACTIVITYNET_TIOU: [f64; 3] = [0.5, 0.75, 0.95];

/// Temporal IoU of two `[start, end]` intervals in seconds.
pub fn tiou(a: (f64, f64), b: (f64, f64)) -> Result<f64> {
    for (s, e) in [a, b] {
        if !(s.is_finite() && e.is_finite() && e > s) {
            return Err(Error::InvalidSegment(format!("[{s}, {e}]")));
        }
    }
    let inter = (a.1.min(b.1) - a.0.max(b.0)).max(0.0);
    let union = a.1.max(b.1) - a.0.min(b.0);
    Ok(inter / union)
}

/// A ground-truth action in one video.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruthSegment {
    pub start: f64,
    pub end: f64,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VideoAnnotations {
    pub duration: f64,
    pub segments: Vec<GroundTruthSegment>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct GroundTruthSet {
    videos: BTreeMap<String, VideoAnnotations>,
}

impl GroundTruthSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(
        &mut self,
        video_id: impl Into<String>,
        annotations: VideoAnnotations,
    ) -> Result<()> {
        let video_id = video_id.into();
        for (i, seg) in annotations.segments.iter().enumerate() {
            if !(seg.start >= 0.0 && seg.start < seg.end && seg.end <= annotations.duration) {
                return Err(Error::InvalidSegment(format!(
                    "{video_id} segment {i}: [{}, {}] with duration {}",
                    seg.start, seg.end, annotations.duration
                )));
            }
        }
        self.videos.insert(video_id, annotations);
        Ok(())
    }

    pub fn videos(&self) -> &BTreeMap<String, VideoAnnotations> {
        &self.videos
    }

    /// Sorted labels that have at least one annotated segment.
    pub fn classes(&self) -> Vec<String> {
        let set: BTreeSet<&str> = self
            .videos
            .values()
            .flat_map(|v| v.segments.iter().map(|s| s.label.as_str()))
            .collect();
        set.into_iter().map(str::to_string).collect()
    }

    pub fn num_segments(&self) -> usize {
        self.videos.values().map(|v| v.segments.len()).sum()
    }

    /// Keeps only segments whose label is in `classes`.
    pub fn restricted_to(&self, classes: &[String]) -> Self {
        let keep: BTreeSet<&str> = classes.iter().map(String::as_str).collect();
        let videos = self
            .videos
            .iter()
            .map(|(id, v)| {
                let segments = v
                    .segments
                    .iter()
                    .filter(|s| keep.contains(s.label.as_str()))
                    .cloned()
                    .collect();
                (
                    id.clone(),
                    VideoAnnotations {
                        duration: v.duration,
                        segments,
                    },
                )
            })
            .collect();
        Self { videos }
    }
}

/// A scored prediction in seconds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Detection {
    pub video_id: String,
    pub label: String,
    pub start: f64,
    pub end: f64,
    pub score: f64,
    /// Emission time in seconds.
    pub emit: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct DetectionSet {
    pub detections: Vec<Detection>,
}

impl DetectionSet {
    pub fn new(detections: Vec<Detection>) -> Self {
        Self { detections }
    }

    pub fn len(&self) -> usize {
        self.detections.len()
    }

    pub fn is_empty(&self) -> bool {
        self.detections.is_empty()
    }

    pub fn labels(&self) -> BTreeSet<&str> {
        self.detections.iter().map(|d| d.label.as_str()).collect()
    }

    pub fn restricted_to(&self, classes: &[String]) -> Self {
        let keep: BTreeSet<&str> = classes.iter().map(String::as_str).collect();
        Self::new(
            self.detections
                .iter()
                .filter(|d| keep.contains(d.label.as_str()))
                .cloned()
                .collect(),
        )
    }
}

/// Score descending, then earlier start, then video id, then end.
fn ranking(a: &Detection, b: &Detection) -> Ordering {
    b.score
        .total_cmp(&a.score)
        .then(a.start.total_cmp(&b.start))
        .then_with(|| a.video_id.cmp(&b.video_id))
        .then(a.end.total_cmp(&b.end))
}

/// AP for a single class at one threshold. `preds` and `gt` must already be
/// filtered to that class; `gt` pairs a video id with a segment.
pub fn average_precision(
    preds: &[Detection],
    gt: &[(String, (f64, f64))],
    threshold: f64,
) -> Result<f64> {
    if !(threshold > 0.0 && threshold <= 1.0) {
        return Err(Error::InvalidSegment(format!(
            "tIoU threshold {threshold} outside (0, 1]"
        )));
    }
    let mut by_video: HashMap<&str, Vec<(f64, f64)>> = HashMap::new();
    for (video, seg) in gt {
        by_video.entry(video.as_str()).or_default().push(*seg);
    }
    let mut ranked: Vec<&Detection> = preds.iter().collect();
    ranked.sort_by(|a, b| ranking(a, b));
    ap_ranked(&ranked, &by_video, gt.len(), threshold)
}

fn ap_ranked(
    ranked: &[&Detection],
    gt_by_video: &HashMap<&str, Vec<(f64, f64)>>,
    num_gt: usize,
    threshold: f64,
) -> Result<f64> {
    if num_gt == 0 {
        return Ok(0.0);
    }
    let mut matched: HashMap<&str, Vec<bool>> = gt_by_video
        .iter()
        .map(|(k, v)| (*k, vec![false; v.len()]))
        .collect();
    let mut tp = 0usize;
    let mut precision_sum = 0.0;
    for (rank, det) in ranked.iter().enumerate() {
        let Some(segments) = gt_by_video.get(det.video_id.as_str()) else {
            continue;
        };
        let used = matched.get_mut(det.video_id.as_str()).expect("same keys");
        let mut best: Option<(usize, f64)> = None;
        for (i, seg) in segments.iter().enumerate() {
            if used[i] {
                continue;
            }
            let overlap = tiou((det.start, det.end), *seg)?;
            if best.is_none_or(|(_, b)| overlap > b) {
                best = Some((i, overlap));
            }
        }
        if let Some((i, overlap)) = best {
            if overlap >= threshold {
                used[i] = true;
                tp += 1;
                precision_sum += tp as f64 / (rank + 1) as f64;
            }
        }
    }
    Ok(precision_sum / num_gt as f64)
}

/// mAP per threshold over every class with ground truth.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MapReport {
    pub thresholds: Vec<f64>,
    pub classes: Vec<String>,
    /// `per_class[c][i]` is AP of class `c` at `thresholds[i]`.
    pub per_class: Vec<Vec<f64>>,
    pub map: Vec<f64>,
    /// Mean of `map` across thresholds.
    pub average: f64,
}

pub fn mean_ap(dets: &DetectionSet, gt: &GroundTruthSet, thresholds: &[f64]) -> Result<MapReport> {
    if gt.num_segments() == 0 {
        return Err(Error::EmptyGroundTruth);
    }
    if thresholds.is_empty() {
        return Err(Error::Usage("no tIoU thresholds given".into()));
    }
    let classes = gt.classes();
    let known: BTreeSet<&str> = classes.iter().map(String::as_str).collect();
    let unknown: Vec<String> = dets
        .labels()
        .into_iter()
        .filter(|l| !known.contains(l))
        .map(str::to_string)
        .collect();
    if !unknown.is_empty() {
        return Err(Error::UnknownClasses(unknown));
    }

    let mut per_class = Vec::with_capacity(classes.len());
    for class in &classes {
        let mut gt_by_video: HashMap<&str, Vec<(f64, f64)>> = HashMap::new();
        let mut num_gt = 0;
        for (video, ann) in gt.videos() {
            for seg in ann.segments.iter().filter(|s| &s.label == class) {
                gt_by_video
                    .entry(video.as_str())
                    .or_default()
                    .push((seg.start, seg.end));
                num_gt += 1;
            }
        }
        let mut ranked: Vec<&Detection> = dets
            .detections
            .iter()
            .filter(|d| &d.label == class)
            .collect();
        ranked.sort_by(|a, b| ranking(a, b));
        let aps = thresholds
            .iter()
            .map(|&thr| {
                if !(thr > 0.0 && thr <= 1.0) {
                    return Err(Error::InvalidSegment(format!(
                        "tIoU threshold {thr} outside (0, 1]"
                    )));
                }
                ap_ranked(&ranked, &gt_by_video, num_gt, thr)
            })
            .collect::<Result<Vec<_>>>()?;
        per_class.push(aps);
    }

    let map: Vec<f64> = (0..thresholds.len())
        .map(|i| per_class.iter().map(|aps| aps[i]).sum::<f64>() / classes.len() as f64)
        .collect();
    let average = map.iter().sum::<f64>() / map.len() as f64;
    Ok(MapReport {
        thresholds: thresholds.to_vec(),
        classes,
        per_class,
        map,
        average,
    })
}

/// Averages mAP over class splits, each evaluated on its own classes only.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SplitReport {
    pub splits: Vec<MapReport>,
    pub thresholds: Vec<f64>,
    pub map: Vec<f64>,
    pub average: f64,
}

pub fn mean_ap_over_splits(
    dets: &DetectionSet,
    gt: &GroundTruthSet,
    thresholds: &[f64],
    splits: &[Vec<String>],
) -> Result<SplitReport> {
    if splits.is_empty() {
        return Err(Error::Usage("split file lists no splits".into()));
    }
    let reports = splits
        .iter()
        .map(|classes| {
            mean_ap(
                &dets.restricted_to(classes),
                &gt.restricted_to(classes),
                thresholds,
            )
        })
        .collect::<Result<Vec<_>>>()?;
    let n = reports.len() as f64;
    let map: Vec<f64> = (0..thresholds.len())
        .map(|i| reports.iter().map(|r| r.map[i]).sum::<f64>() / n)
        .collect();
    let average = reports.iter().map(|r| r.average).sum::<f64>() / n;
    Ok(SplitReport {
        splits: reports,
        thresholds: thresholds.to_vec(),
        map,
        average,
    })
}
