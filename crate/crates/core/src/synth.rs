//! Seeded synthetic benchmark generator.
//!
//! Builds an orthonormal text bank (one axis per class plus foreground and
//! background axes), plants labeled segments in each video, and emits
//! features that point at `class + 0.5 * foreground` inside segments and at
//! the background axis outside, each plus isotropic Gaussian noise whose
//! expected norm is `noise`.

use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::eval::{GroundTruthSegment, GroundTruthSet, VideoAnnotations};
use crate::io::{self, FeatureManifest, ManifestEntry};
use crate::model::{FrameFeature, TextBank, TimeBase};

pub const FOREGROUND_PROMPT: &str = "A scene depicting a person performing an action";
pub const BACKGROUND_PROMPT: &str = "A scene without any action";

/// Weight of the foreground axis in action features.
const FOREGROUND_MIX: f64 = 0.5;

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub classes: usize,
    pub dim: usize,
    pub videos: usize,
    pub seed: u64,
    pub noise: f64,
    pub timesteps: usize,
    pub fps: f64,
    pub stride: usize,
    pub window_len: usize,
    /// Inclusive range of planted segment lengths in timesteps.
    pub segment_len: (usize, usize),
    /// Inclusive range of background gaps between segments.
    pub gap_len: (usize, usize),
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            classes: 3,
            dim: 16,
            videos: 5,
            seed: 42,
            noise: 0.0,
            timesteps: 300,
            fps: 30.0,
            stride: 1,
            window_len: 8,
            segment_len: (20, 60),
            gap_len: (10, 40),
        }
    }
}

/// A planted action in timestep units, `end_t` inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PlantedSegment {
    pub start_t: usize,
    pub end_t: usize,
    pub class_index: usize,
}

#[derive(Debug, Clone)]
pub struct SynthVideo {
    pub video_id: String,
    pub features: Vec<FrameFeature>,
    pub segments: Vec<PlantedSegment>,
}

#[derive(Debug, Clone)]
pub struct SynthDataset {
    pub config: SynthConfig,
    pub text: TextBank,
    pub videos: Vec<SynthVideo>,
}

/// Paths written by [`SynthDataset::write`].
#[derive(Debug, Clone)]
pub struct SynthPaths {
    pub features_dir: PathBuf,
    pub textbank_prefix: PathBuf,
    pub ground_truth: PathBuf,
}

fn gaussian(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    (0..dim)
        .map(|_| rng.sample::<f64, _>(StandardNormal))
        .collect()
}

/// Gram-Schmidt on Gaussian draws.
fn orthonormal_basis(rng: &mut ChaCha8Rng, count: usize, dim: usize) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(count);
    while basis.len() < count {
        let mut v = gaussian(rng, dim);
        for b in &basis {
            let proj: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
            v.iter_mut().zip(b).for_each(|(x, y)| *x -= proj * y);
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-6 {
            v.iter_mut().for_each(|x| *x /= norm);
            basis.push(v);
        }
    }
    basis
}

impl SynthConfig {
    fn check(&self) -> Result<()> {
        if self.classes < 1 {
            return Err(Error::Usage("--classes must be ≥ 1".into()));
        }
        if self.dim < self.classes + 2 {
            return Err(Error::Usage(format!(
                "--dim {} too small for {} classes: need D ≥ K+2 = {}",
                self.dim,
                self.classes,
                self.classes + 2
            )));
        }
        if !(self.noise.is_finite() && self.noise >= 0.0) {
            return Err(Error::Usage("--noise must be ≥ 0".into()));
        }
        let (lo, hi) = self.segment_len;
        let (glo, ghi) = self.gap_len;
        if lo == 0 || lo > hi || glo == 0 || glo > ghi {
            return Err(Error::Usage(
                "segment and gap ranges must be non-empty and positive".into(),
            ));
        }
        if self.videos == 0 || self.timesteps <= 2 * ghi {
            return Err(Error::Usage(
                "need at least one video and enough timesteps for a gap".into(),
            ));
        }
        Ok(())
    }

    pub fn time_base(&self) -> TimeBase {
        TimeBase {
            fps: self.fps,
            stride: self.stride,
        }
    }
}

pub fn generate(config: &SynthConfig) -> Result<SynthDataset> {
    config.check()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let k = config.classes;
    let dim = config.dim;
    // f32-representable so the in-memory dataset matches a reload from disk
    let mut basis: Vec<Vec<f64>> = orthonormal_basis(&mut rng, k + 2, dim)
        .into_iter()
        .map(|row| row.iter().map(|&v| f64::from(v as f32)).collect())
        .collect();
    let background = basis.pop().expect("k+2 vectors");
    let foreground = basis.pop().expect("k+2 vectors");
    let text = TextBank::new(
        (0..k).map(|i| format!("Action{i:02}")).collect(),
        (0..k)
            .map(|i| format!("a person performing synthetic action number {i}"))
            .collect(),
        basis.clone(),
        foreground.clone(),
        background.clone(),
    )?;

    let noise_per_dim = config.noise / (dim as f64).sqrt();
    let mut videos = Vec::with_capacity(config.videos);
    for v in 0..config.videos {
        let segments = plant_segments(&mut rng, config);
        let mut features = Vec::with_capacity(config.timesteps);
        let mut seg_iter = segments.iter().peekable();
        for t in 0..config.timesteps {
            while seg_iter.peek().is_some_and(|s| s.end_t < t) {
                seg_iter.next();
            }
            let mut x: Vec<f64> = match seg_iter.peek() {
                Some(s) if s.start_t <= t => basis[s.class_index]
                    .iter()
                    .zip(&foreground)
                    .map(|(c, f)| c + FOREGROUND_MIX * f)
                    .collect(),
                _ => background.clone(),
            };
            if noise_per_dim > 0.0 {
                for xi in x.iter_mut() {
                    *xi += noise_per_dim * rng.sample::<f64, _>(StandardNormal);
                }
            }
            let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            x.iter_mut().for_each(|v| *v /= norm);
            let x: Vec<f64> = x.iter().map(|&v| f64::from(v as f32)).collect();
            features.push(FrameFeature::new(t, x)?);
        }
        videos.push(SynthVideo {
            video_id: format!("synth_video_{v:03}"),
            features,
            segments,
        });
    }
    Ok(SynthDataset {
        config: config.clone(),
        text,
        videos,
    })
}

/// Alternating background gaps and segments, always ending in background.
fn plant_segments(rng: &mut ChaCha8Rng, config: &SynthConfig) -> Vec<PlantedSegment> {
    let mut segments = Vec::new();
    let mut t = rng.random_range(config.gap_len.0..=config.gap_len.1);
    loop {
        let len = rng.random_range(config.segment_len.0..=config.segment_len.1);
        let end_t = t + len - 1;
        if end_t + config.gap_len.0 >= config.timesteps {
            break;
        }
        segments.push(PlantedSegment {
            start_t: t,
            end_t,
            class_index: rng.random_range(0..config.classes),
        });
        t = end_t + 1 + rng.random_range(config.gap_len.0..=config.gap_len.1);
    }
    segments
}

impl SynthDataset {
    pub fn ground_truth(&self) -> Result<GroundTruthSet> {
        let tb = self.config.time_base();
        let mut gt = GroundTruthSet::new();
        for video in &self.videos {
            gt.insert(
                video.video_id.clone(),
                VideoAnnotations {
                    duration: tb.seconds(self.config.timesteps),
                    segments: video
                        .segments
                        .iter()
                        .map(|s| GroundTruthSegment {
                            start: tb.seconds(s.start_t),
                            end: tb.seconds(s.end_t + 1),
                            label: self.text.class_names()[s.class_index].clone(),
                        })
                        .collect(),
                },
            )?;
        }
        Ok(gt)
    }

    pub fn manifest(&self) -> FeatureManifest {
        FeatureManifest::new(
            self.videos
                .iter()
                .map(|v| ManifestEntry {
                    video_id: v.video_id.clone(),
                    path: format!("{}.bin", v.video_id),
                    timesteps: v.features.len(),
                    dim: self.config.dim,
                    fps: self.config.fps,
                    stride: self.config.stride,
                    window_len: self.config.window_len,
                })
                .collect(),
        )
    }

    /// Writes `features/`, `textbank.{json,bin}` and `gt.json` under `out`.
    pub fn write(&self, out: &Path) -> Result<SynthPaths> {
        let features_dir = out.join("features");
        std::fs::create_dir_all(&features_dir).map_err(|e| Error::io(&features_dir, e))?;
        let manifest = self.manifest();
        for (entry, video) in manifest.videos.iter().zip(&self.videos) {
            io::write_features(&features_dir, entry, &video.features)?;
        }
        manifest.save(&features_dir)?;
        let textbank_prefix = out.join("textbank");
        io::write_textbank(
            &textbank_prefix,
            &self.text,
            FOREGROUND_PROMPT,
            BACKGROUND_PROMPT,
        )?;
        let ground_truth = out.join("gt.json");
        io::write_annotations(&ground_truth, &self.ground_truth()?)?;
        Ok(SynthPaths {
            features_dir,
            textbank_prefix,
            ground_truth,
        })
    }
}
