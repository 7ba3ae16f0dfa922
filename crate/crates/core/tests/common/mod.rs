//! Independent reference implementations used as test oracles.
//!
//! Nothing in here calls into the library's scoring, span or evaluation
//! code paths; only plain data types are shared.

#![allow(dead_code)]

use oztal::eval::{Detection, GroundTruthSet};

/// Maximal runs of `scores[t] > threshold`, as inclusive `(start, end, sum)`.
pub fn above_threshold_runs(scores: &[f64], threshold: f64) -> Vec<(usize, usize, f64)> {
    let mut runs = Vec::new();
    let mut t = 0;
    while t < scores.len() {
        if scores[t] > threshold {
            let start = t;
            while t < scores.len() && scores[t] > threshold {
                t += 1;
            }
            let sum: f64 = scores[start..t].iter().sum();
            runs.push((start, t - 1, sum));
        } else {
            t += 1;
        }
    }
    runs
}

/// Confidence recomputed from the stored run.
pub fn run_confidence(scores: &[f64], start: usize, end: usize) -> f64 {
    let run = &scores[start..=end];
    run.iter().sum::<f64>() / (run.len() as f64).sqrt()
}

fn interval_iou(a: (f64, f64), b: (f64, f64)) -> f64 {
    let lo = if a.0 > b.0 { a.0 } else { b.0 };
    let hi = if a.1 < b.1 { a.1 } else { b.1 };
    let inter = if hi > lo { hi - lo } else { 0.0 };
    let union = (a.1 - a.0) + (b.1 - b.0) - inter;
    inter / union
}

/// Brute-force AP: full IoU matrix, explicit precision/recall arrays.
fn brute_ap(preds: &[&Detection], gts: &[(&str, f64, f64)], threshold: f64) -> f64 {
    if gts.is_empty() {
        return 0.0;
    }
    let mut order: Vec<usize> = (0..preds.len()).collect();
    order.sort_by(|&i, &j| {
        let (a, b) = (preds[i], preds[j]);
        if a.score != b.score {
            return b.score.partial_cmp(&a.score).unwrap();
        }
        if a.start != b.start {
            return a.start.partial_cmp(&b.start).unwrap();
        }
        if a.video_id != b.video_id {
            return a.video_id.cmp(&b.video_id);
        }
        a.end.partial_cmp(&b.end).unwrap()
    });
    let iou: Vec<Vec<f64>> = order
        .iter()
        .map(|&i| {
            gts.iter()
                .map(|g| {
                    if g.0 == preds[i].video_id {
                        interval_iou((preds[i].start, preds[i].end), (g.1, g.2))
                    } else {
                        -1.0
                    }
                })
                .collect()
        })
        .collect();
    let mut taken = vec![false; gts.len()];
    let mut is_tp = vec![false; order.len()];
    for (rank, row) in iou.iter().enumerate() {
        let mut best = -1.0;
        let mut best_j = None;
        for (j, &v) in row.iter().enumerate() {
            if !taken[j] && v >= 0.0 && v > best {
                best = v;
                best_j = Some(j);
            }
        }
        if let Some(j) = best_j {
            if best >= threshold {
                taken[j] = true;
                is_tp[rank] = true;
            }
        }
    }
    let mut tp_cum = 0.0;
    let mut precision = Vec::with_capacity(order.len());
    for (rank, &tp) in is_tp.iter().enumerate() {
        if tp {
            tp_cum += 1.0;
        }
        precision.push(tp_cum / (rank + 1) as f64);
    }
    let mut ap = 0.0;
    for (rank, &tp) in is_tp.iter().enumerate() {
        if tp {
            ap += precision[rank];
        }
    }
    ap / gts.len() as f64
}

/// mAP per threshold plus the cross-threshold average.
pub fn brute_map(dets: &[Detection], gt: &GroundTruthSet, thresholds: &[f64]) -> (Vec<f64>, f64) {
    let mut classes: Vec<String> = Vec::new();
    for v in gt.videos().values() {
        for s in &v.segments {
            if !classes.contains(&s.label) {
                classes.push(s.label.clone());
            }
        }
    }
    let mut per_threshold = Vec::new();
    for &thr in thresholds {
        let mut total = 0.0;
        for class in &classes {
            let preds: Vec<&Detection> = dets.iter().filter(|d| &d.label == class).collect();
            let mut gts = Vec::new();
            for (vid, v) in gt.videos() {
                for s in v.segments.iter().filter(|s| &s.label == class) {
                    gts.push((vid.as_str(), s.start, s.end));
                }
            }
            total += brute_ap(&preds, &gts, thr);
        }
        per_threshold.push(total / classes.len() as f64);
    }
    let avg = per_threshold.iter().sum::<f64>() / per_threshold.len() as f64;
    (per_threshold, avg)
}
