//! End-to-end drivers behind the `oztal` binary: localize, eval, sweep, synth.
//!
//! Everything here works on files in the formats of [`crate::io`] and is
//! callable directly from library code and tests.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classify::ScoreVector;
use crate::error::{Error, Result};
use crate::eval::{mean_ap, mean_ap_over_splits, Detection, DetectionSet, MapReport};
use crate::io::{self, FeatureManifest, ManifestEntry};
use crate::model::{LocalizerConfig, TextBank};
use crate::stream::{run_stream_with, score_stream, spans_from_scores, StepTrace};
use crate::synth::{self, SynthConfig, SynthPaths};

/// Applies a memory length where 0 disables the memory bank entirely.
pub fn with_memory_len(mut config: LocalizerConfig, memory_len: usize) -> LocalizerConfig {
    if memory_len == 0 {
        config.memory_enhancement = false;
    } else {
        config.memory_enhancement = true;
        config.memory_capacity = memory_len;
    }
    config
}

/// Per-video config: frame rate and stride come from the manifest.
fn video_config(base: &LocalizerConfig, entry: &ManifestEntry) -> LocalizerConfig {
    LocalizerConfig {
        fps: entry.fps,
        stride: entry.stride,
        window_len: entry.window_len,
        ..base.clone()
    }
}

fn thread_pool(jobs: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::Usage(format!("cannot start {jobs} worker threads: {e}")))
}

fn load_inputs(features: &Path, textbank: &Path) -> Result<(FeatureManifest, TextBank)> {
    let manifest = FeatureManifest::load(features)?;
    let (json, bin) = io::textbank_paths(textbank);
    let text = io::load_textbank(&json, &bin)?;
    if let Some(dim) = manifest.dim() {
        if dim != text.dim() {
            return Err(Error::DimensionMismatch {
                expected: text.dim(),
                actual: dim,
            });
        }
    }
    Ok((manifest, text))
}

#[derive(Debug, Clone)]
pub struct LocalizeOptions {
    /// Directory holding `manifest.json`.
    pub features: PathBuf,
    /// Text bank prefix; `.json` and `.bin` are appended.
    pub textbank: PathBuf,
    pub out: PathBuf,
    pub config: LocalizerConfig,
    pub trace: Option<PathBuf>,
    pub jobs: usize,
}

#[derive(Serialize)]
struct TraceLine<'a> {
    video_id: &'a str,
    #[serde(flatten)]
    step: &'a StepTrace,
}

/// Localizes every manifest video and writes the prediction log. Output
/// order follows the manifest regardless of `jobs`.
pub fn localize(opts: &LocalizeOptions) -> Result<Vec<Detection>> {
    let config = opts.config.clone().validate()?;
    let (manifest, text) = load_inputs(&opts.features, &opts.textbank)?;
    let want_trace = opts.trace.is_some();

    let per_video = thread_pool(opts.jobs)?.install(|| {
        manifest
            .videos
            .par_iter()
            .map(|entry| {
                let features = io::read_features(&opts.features, entry)?;
                let cfg = video_config(&config, entry);
                let out = run_stream_with(&features, &text, &cfg, want_trace)?;
                let dets = io::detections_from_instances(
                    &entry.video_id,
                    &out.instances,
                    &text,
                    cfg.time_base(),
                );
                Ok((dets, out.trace))
            })
            .collect::<Result<Vec<_>>>()
    })?;

    if let Some(trace_path) = &opts.trace {
        let mut text_out = String::new();
        for (entry, (_, trace)) in manifest.videos.iter().zip(&per_video) {
            for step in trace.iter().flatten() {
                let line = TraceLine {
                    video_id: &entry.video_id,
                    step,
                };
                text_out.push_str(
                    &serde_json::to_string(&line)
                        .map_err(|e| Error::format(trace_path, e.to_string()))?,
                );
                text_out.push('\n');
            }
        }
        std::fs::write(trace_path, text_out).map_err(|e| Error::io(trace_path, e))?;
    }

    let detections: Vec<Detection> = per_video.into_iter().flat_map(|(d, _)| d).collect();
    io::write_predictions(&opts.out, &detections)?;
    log::info!(
        "localized {} videos, {} instances -> {}",
        manifest.videos.len(),
        detections.len(),
        opts.out.display()
    );
    Ok(detections)
}

#[derive(Debug, Clone)]
pub struct EvalOptions {
    pub preds: PathBuf,
    pub gt: PathBuf,
    pub tiou: Vec<f64>,
    pub splits: Option<PathBuf>,
    pub json: Option<PathBuf>,
}

/// Split file: `{"splits": [["ClassA", "ClassB"], ...]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SplitFile {
    pub splits: Vec<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalSummary {
    pub thresholds: Vec<f64>,
    pub map: Vec<f64>,
    pub average: f64,
    /// Per-split reports when a split file was given, otherwise one report.
    pub reports: Vec<MapReport>,
}

/// Fixed-width mAP table in percent, one column per threshold plus `Avg`.
pub fn format_table(thresholds: &[f64], map: &[f64], average: f64) -> String {
    let mut out = String::new();
    let _ = write!(out, "{:<6}", "tIoU");
    for t in thresholds {
        let _ = write!(out, "{:>8}", format!("{t:.2}"));
    }
    let _ = writeln!(out, "{:>8}", "Avg");
    let _ = write!(out, "{:<6}", "mAP");
    for m in map {
        let _ = write!(out, "{:>8.2}", m * 100.0);
    }
    let _ = writeln!(out, "{:>8.2}", average * 100.0);
    out
}

pub fn evaluate(opts: &EvalOptions) -> Result<EvalSummary> {
    let dets = io::read_predictions(&opts.preds)?;
    let gt = io::load_annotations(&opts.gt)?;
    let summary = match &opts.splits {
        None => {
            let report = mean_ap(&dets, &gt, &opts.tiou)?;
            EvalSummary {
                thresholds: report.thresholds.clone(),
                map: report.map.clone(),
                average: report.average,
                reports: vec![report],
            }
        }
        Some(path) => {
            let file: SplitFile = io::read_json(path)?;
            let report = mean_ap_over_splits(&dets, &gt, &opts.tiou, &file.splits)?;
            EvalSummary {
                thresholds: report.thresholds,
                map: report.map,
                average: report.average,
                reports: report.splits,
            }
        }
    };
    if let Some(json) = &opts.json {
        io::write_json(json, &summary)?;
    }
    Ok(summary)
}

/// Parameter grid over the action threshold and memory length.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepGrid {
    pub taus: Vec<f64>,
    pub memory_lens: Vec<usize>,
}

fn parse_axis(text: &str) -> Result<Vec<f64>> {
    let bad = || {
        Error::Usage(format!(
            "bad grid axis {text:?}: use a,b,c or start:end:step"
        ))
    };
    let parts: Vec<&str> = text.split(':').collect();
    match parts.as_slice() {
        [start, end, step] => {
            let (start, end, step): (f64, f64, f64) = (
                start.trim().parse().map_err(|_| bad())?,
                end.trim().parse().map_err(|_| bad())?,
                step.trim().parse().map_err(|_| bad())?,
            );
            if step.is_nan() || step <= 0.0 || end < start {
                return Err(bad());
            }
            let n = ((end - start) / step + 1e-9).floor() as usize;
            Ok((0..=n).map(|i| start + i as f64 * step).collect())
        }
        [list] => list
            .split(',')
            .filter(|s| !s.trim().is_empty())
            .map(|s| s.trim().parse().map_err(|_| bad()))
            .collect(),
        _ => Err(bad()),
    }
}

impl SweepGrid {
    /// Parses `tau=5:20:2.5;lq=0,5,10,20,40`. An omitted axis falls back to
    /// the matching field of `defaults`.
    pub fn parse(text: &str, defaults: &LocalizerConfig) -> Result<Self> {
        let mut taus = None;
        let mut memory_lens = None;
        for part in text.split(';').map(str::trim).filter(|p| !p.is_empty()) {
            let (key, value) = part.split_once('=').ok_or_else(|| {
                Error::Usage(format!("bad grid term {part:?}: expected key=values"))
            })?;
            let values = parse_axis(value)?;
            match key.trim() {
                "tau" => taus = Some(values),
                "lq" => {
                    let lens = values
                        .iter()
                        .map(|&v| {
                            if v >= 0.0 && v.fract() == 0.0 {
                                Ok(v as usize)
                            } else {
                                Err(Error::Usage(format!(
                                    "lq values must be non-negative integers, got {v}"
                                )))
                            }
                        })
                        .collect::<Result<Vec<_>>>()?;
                    memory_lens = Some(lens);
                }
                other => {
                    return Err(Error::Usage(format!(
                        "unknown grid key {other:?} (expected tau or lq)"
                    )))
                }
            }
        }
        let grid = Self {
            taus: taus.unwrap_or_else(|| vec![defaults.action_threshold]),
            memory_lens: memory_lens.unwrap_or_else(|| vec![defaults.memory_capacity]),
        };
        if grid.taus.is_empty() || grid.memory_lens.is_empty() {
            return Err(Error::Usage("empty grid".into()));
        }
        Ok(grid)
    }

    pub fn len(&self) -> usize {
        self.taus.len() * self.memory_lens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone)]
pub struct SweepOptions {
    pub features: PathBuf,
    pub textbank: PathBuf,
    pub gt: PathBuf,
    pub grid: SweepGrid,
    /// Base config; `action_threshold` and memory length are overridden per point.
    pub config: LocalizerConfig,
    pub tiou: Vec<f64>,
    pub jobs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub tau: f64,
    pub memory_len: usize,
    pub map: Vec<f64>,
    pub average: f64,
}

/// Cache key for refined score streams: everything upstream of the action threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct ScoreKey {
    memory_len: usize,
    fusion_threshold: u64,
    logit_scale: u64,
}

/// Evaluates every grid point. Refined scores are computed once per memory
/// length; threshold changes only replay the state machine.
pub fn sweep(opts: &SweepOptions) -> Result<Vec<SweepRow>> {
    if opts.grid.is_empty() {
        return Err(Error::Usage("empty grid".into()));
    }
    let (manifest, text) = load_inputs(&opts.features, &opts.textbank)?;
    let gt = io::load_annotations(&opts.gt)?;
    let pool = thread_pool(opts.jobs)?;
    let features = pool.install(|| {
        manifest
            .videos
            .par_iter()
            .map(|e| io::read_features(&opts.features, e))
            .collect::<Result<Vec<_>>>()
    })?;

    let mut cache: HashMap<ScoreKey, Vec<Vec<ScoreVector>>> = HashMap::new();
    let mut rows = Vec::with_capacity(opts.grid.len());
    for &memory_len in &opts.grid.memory_lens {
        let base = with_memory_len(opts.config.clone(), memory_len);
        let key = ScoreKey {
            memory_len,
            fusion_threshold: base.fusion_threshold.to_bits(),
            logit_scale: base.logit_scale.to_bits(),
        };
        if let std::collections::hash_map::Entry::Vacant(slot) = cache.entry(key) {
            let scores = pool.install(|| {
                manifest
                    .videos
                    .par_iter()
                    .zip(&features)
                    .map(|(entry, feats)| score_stream(feats, &text, &video_config(&base, entry)))
                    .collect::<Result<Vec<_>>>()
            })?;
            slot.insert(scores);
        }
        let scores = &cache[&key];
        for &tau in &opts.grid.taus {
            let cfg = LocalizerConfig {
                action_threshold: tau,
                ..base.clone()
            }
            .validate()?;
            let mut dets = Vec::new();
            for (entry, video_scores) in manifest.videos.iter().zip(scores) {
                let vcfg = video_config(&cfg, entry);
                let instances = spans_from_scores(video_scores, text.num_classes(), &vcfg)?;
                dets.extend(io::detections_from_instances(
                    &entry.video_id,
                    &instances,
                    &text,
                    vcfg.time_base(),
                ));
            }
            let report = mean_ap(&DetectionSet::new(dets), &gt, &opts.tiou)?;
            rows.push(SweepRow {
                tau,
                memory_len,
                map: report.map,
                average: report.average,
            });
        }
    }
    Ok(rows)
}

/// CSV with columns `tau,lq,map@<thr>...,avg`, mAP in percent.
pub fn sweep_csv(thresholds: &[f64], rows: &[SweepRow]) -> String {
    let mut out = String::from("tau,lq");
    for t in thresholds {
        let _ = write!(out, ",map@{t:.2}");
    }
    out.push_str(",avg\n");
    for row in rows {
        let _ = write!(out, "{},{}", row.tau, row.memory_len);
        for m in &row.map {
            let _ = write!(out, ",{:.4}", m * 100.0);
        }
        let _ = writeln!(out, ",{:.4}", row.average * 100.0);
    }
    out
}

/// Generates and writes a synthetic benchmark under `out`.
pub fn synthesize(config: &SynthConfig, out: &Path) -> Result<SynthPaths> {
    let data = synth::generate(config)?;
    data.write(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_parsing() {
        let d = LocalizerConfig::default();
        let g = SweepGrid::parse("tau=5:20:2.5", &d).unwrap();
        assert_eq!(g.taus, vec![5.0, 7.5, 10.0, 12.5, 15.0, 17.5, 20.0]);
        assert_eq!(g.memory_lens, vec![20]);

        let g = SweepGrid::parse("lq=0,5,10,20,40; tau=8", &d).unwrap();
        assert_eq!(g.memory_lens, vec![0, 5, 10, 20, 40]);
        assert_eq!(g.taus, vec![8.0]);
        assert_eq!(g.len(), 5);

        assert!(SweepGrid::parse("tau=", &d).is_err());
        assert!(SweepGrid::parse("lq=1.5", &d).is_err());
        assert!(SweepGrid::parse("foo=1", &d).is_err());
        assert!(SweepGrid::parse("tau=20:5:1", &d).is_err());
    }

    #[test]
    fn memory_len_zero_disables_bank() {
        let cfg = with_memory_len(LocalizerConfig::default(), 0);
        assert!(!cfg.memory_enhancement);
        assert!(cfg.clone().validate().is_ok());
        let cfg = with_memory_len(cfg, 40);
        assert!(cfg.memory_enhancement);
        assert_eq!(cfg.memory_capacity, 40);
    }

    #[test]
    fn table_layout() {
        let table = format_table(&[0.3, 0.4, 0.5, 0.6, 0.7], &[1.0; 5], 1.0);
        let lines: Vec<&str> = table.lines().collect();
        assert_eq!(
            lines[0].split_whitespace().collect::<Vec<_>>(),
            ["tIoU", "0.30", "0.40", "0.50", "0.60", "0.70", "Avg"]
        );
        assert_eq!(
            lines[1]
                .split_whitespace()
                .filter(|s| *s == "100.00")
                .count(),
            6
        );
    }

    #[test]
    fn csv_layout() {
        let rows = vec![SweepRow {
            tau: 7.5,
            memory_len: 20,
            map: vec![0.5, 0.25],
            average: 0.375,
        }];
        assert_eq!(
            sweep_csv(&[0.5, 0.75], &rows),
            "tau,lq,map@0.50,map@0.75,avg\n7.5,20,50.0000,25.0000,37.5000\n"
        );
    }
}
