//! Configuration and the domain types shared by every pipeline stage.
//!
//! Time is measured in timesteps internally. One timestep covers `stride`
//! raw frames, so timestep `t` spans `[t, t + 1) * stride / fps` seconds.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One embedding per stream timestep: the encoded short window ending at `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameFeature {
    t: usize,
    values: Vec<f64>,
}

impl FrameFeature {
    /// Rejects non-finite entries and all-zero vectors.
    pub fn new(t: usize, values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::DimensionMismatch {
                expected: 1,
                actual: 0,
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteFeature { t });
        }
        if values.iter().all(|&v| v == 0.0) {
            return Err(Error::ZeroNorm);
        }
        Ok(Self { t, values })
    }

    pub fn from_f32(t: usize, values: &[f32]) -> Result<Self> {
        Self::new(t, values.iter().map(|&v| f64::from(v)).collect())
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}

/// Class, foreground and background text embeddings.
///
/// Every row is L2-normalized on construction, so scoring only has to divide
/// by the visual feature's norm.
#[derive(Debug, Clone, PartialEq)]
pub struct TextBank {
    class_names: Vec<String>,
    class_descriptions: Vec<String>,
    /// Row-major `K x D`.
    class_embeddings: Vec<f64>,
    foreground: Vec<f64>,
    background: Vec<f64>,
    dim: usize,
}

impl TextBank {
    pub fn new(
        class_names: Vec<String>,
        class_descriptions: Vec<String>,
        class_embeddings: Vec<Vec<f64>>,
        foreground: Vec<f64>,
        background: Vec<f64>,
    ) -> Result<Self> {
        let k = class_names.len();
        if k == 0 {
            return Err(Error::InvalidConfig(
                "text bank needs at least one class".into(),
            ));
        }
        if class_descriptions.len() != k || class_embeddings.len() != k {
            return Err(Error::ClassCountMismatch {
                expected: k,
                actual: class_embeddings.len().min(class_descriptions.len()),
            });
        }
        let mut seen = HashSet::new();
        for name in &class_names {
            if !seen.insert(name.as_str()) {
                return Err(Error::InvalidConfig(format!(
                    "duplicate class name {name:?}"
                )));
            }
        }
        let dim = foreground.len();
        if dim == 0 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                actual: 0,
            });
        }
        let mut flat = Vec::with_capacity(k * dim);
        for row in &class_embeddings {
            flat.extend(normalized_row(row, dim)?);
        }
        let foreground = normalized_row(&foreground, dim)?;
        let background = normalized_row(&background, dim)?;
        Ok(Self {
            class_names,
            class_descriptions,
            class_embeddings: flat,
            foreground,
            background,
            dim,
        })
    }

    pub fn num_classes(&self) -> usize {
        self.class_names.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn class_descriptions(&self) -> &[String] {
        &self.class_descriptions
    }

    pub fn class_embedding(&self, index: usize) -> &[f64] {
        &self.class_embeddings[index * self.dim..(index + 1) * self.dim]
    }

    pub fn class_embeddings(&self) -> impl Iterator<Item = &[f64]> {
        self.class_embeddings.chunks_exact(self.dim)
    }

    pub fn foreground(&self) -> &[f64] {
        &self.foreground
    }

    pub fn background(&self) -> &[f64] {
        &self.background
    }

    pub fn class_index(&self, name: &str) -> Option<usize> {
        self.class_names.iter().position(|n| n == name)
    }
}

fn normalized_row(row: &[f64], dim: usize) -> Result<Vec<f64>> {
    if row.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            actual: row.len(),
        });
    }
    if row.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("text embedding".into()));
    }
    let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(Error::ZeroNorm);
    }
    Ok(row.iter().map(|v| v / norm).collect())
}

/// Hyperparameters of the localizer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalizerConfig {
    /// Timesteps per encoded window. Provenance only; windows are encoded upstream.
    pub window_len: usize,
    pub memory_capacity: usize,
    pub fusion_threshold: f64,
    pub action_threshold: f64,
    pub logit_scale: f64,
    pub fps: f64,
    /// Raw frames per timestep.
    pub stride: usize,
    pub renormalize_fused: bool,
    pub normalized_memory_weights: bool,
    /// When false the memory bank is bypassed and `z_t = x_t`.
    pub memory_enhancement: bool,
    /// When false class scores are thresholded without the background penalty.
    pub background_refinement: bool,
}

impl Default for LocalizerConfig {
    fn default() -> Self {
        Self::thumos14()
    }
}

impl LocalizerConfig {
    /// THUMOS14 settings: L_q = 20, tau = 10.
    pub fn thumos14() -> Self {
        Self {
            window_len: 8,
            memory_capacity: 20,
            fusion_threshold: 0.8,
            action_threshold: 10.0,
            logit_scale: 100.0,
            fps: 30.0,
            stride: 1,
            renormalize_fused: true,
            normalized_memory_weights: false,
            memory_enhancement: true,
            background_refinement: true,
        }
    }

    /// ActivityNet-1.3 settings: L_q = 40, tau = 8.
    pub fn activitynet() -> Self {
        Self {
            memory_capacity: 40,
            action_threshold: 8.0,
            ..Self::thumos14()
        }
    }

    /// Returns the config unchanged when every field is in range, otherwise
    /// an error naming the first offending field.
    pub fn validate(self) -> Result<Self> {
        let fail = |msg: &str| Err(Error::InvalidConfig(msg.to_string()));
        if self.window_len < 1 {
            return fail("window_len must be ≥ 1");
        }
        if self.memory_capacity < 1 {
            return fail("memory_capacity must be ≥ 1");
        }
        if !(-1.0..=1.0).contains(&self.fusion_threshold) {
            return fail("fusion_threshold outside [-1,1]");
        }
        if !self.action_threshold.is_finite() {
            return fail("action_threshold must be finite");
        }
        if !(self.logit_scale.is_finite() && self.logit_scale > 0.0) {
            return fail("logit_scale must be > 0");
        }
        if !(self.fps.is_finite() && self.fps > 0.0) {
            return fail("fps must be > 0");
        }
        if self.stride < 1 {
            return fail("stride must be ≥ 1");
        }
        Ok(self)
    }

    pub fn time_base(&self) -> TimeBase {
        TimeBase {
            fps: self.fps,
            stride: self.stride,
        }
    }
}

/// Conversion between timesteps and seconds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeBase {
    pub fps: f64,
    pub stride: usize,
}

impl TimeBase {
    /// Start of timestep `t` in seconds.
    pub fn seconds(&self, t: usize) -> f64 {
        t as f64 * self.stride as f64 / self.fps
    }

    /// Nearest timestep boundary for a time in seconds.
    pub fn timestep(&self, sec: f64) -> usize {
        (sec * self.fps / self.stride as f64).round().max(0.0) as usize
    }
}

/// A localized action, emitted once the class's run of above-threshold
/// scores ends.
#[derive(Debug, Clone, PartialEq)]
pub struct ActionInstance {
    pub start_t: usize,
    /// Last timestep inside the action (inclusive).
    pub end_t: usize,
    pub class_index: usize,
    pub confidence: f64,
    pub emit_t: usize,
    pub start_sec: f64,
    /// End of the last timestep, i.e. `(end_t + 1) * stride / fps`.
    pub end_sec: f64,
}

impl ActionInstance {
    pub fn new(
        start_t: usize,
        end_t: usize,
        class_index: usize,
        confidence: f64,
        emit_t: usize,
        time_base: TimeBase,
    ) -> Self {
        Self {
            start_t,
            end_t,
            class_index,
            confidence,
            emit_t,
            start_sec: time_base.seconds(start_t),
            end_sec: time_base.seconds(end_t + 1),
        }
    }

    /// Emitted by an end-of-stream flush rather than a 1→0 transition.
    pub fn is_flush(&self) -> bool {
        self.emit_t == self.end_t
    }

    /// Number of timesteps covered.
    pub fn num_steps(&self) -> usize {
        self.end_t - self.start_t + 1
    }
}
