//! Long-term memory bank and memory-guided feature enhancement.
//!
//! Foreground-looking features are queued in a bounded FIFO. Each step the
//! queue is summarized twice: a plain mean decides whether memory is relevant
//! to the current feature, and a recency-weighted mean is blended into it.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::model::{FrameFeature, LocalizerConfig};

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn l2_norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub(crate) fn check_dim(expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, actual })
    }
}

/// Cosine similarity. Errors on zero-norm input or a length mismatch.
pub fn cosine(a: &[f64], b: &[f64]) -> Result<f64> {
    check_dim(a.len(), b.len())?;
    let na = l2_norm(a);
    let nb = l2_norm(b);
    if na == 0.0 || nb == 0.0 {
        return Err(Error::ZeroNorm);
    }
    Ok((dot(a, b) / (na * nb)).clamp(-1.0, 1.0))
}

/// Bounded FIFO of salient historical features, oldest first.
#[derive(Debug, Clone, PartialEq)]
pub struct MemoryBank {
    entries: VecDeque<Vec<f64>>,
    capacity: usize,
    /// Mean of `entries`, refreshed on every change.
    mean: Vec<f64>,
}

impl MemoryBank {
    pub fn new(capacity: usize) -> Result<Self> {
        if capacity == 0 {
            return Err(Error::InvalidConfig("memory_capacity must be ≥ 1".into()));
        }
        Ok(Self {
            entries: VecDeque::with_capacity(capacity),
            capacity,
            mean: Vec::new(),
        })
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> impl ExactSizeIterator<Item = &[f64]> {
        self.entries.iter().map(Vec::as_slice)
    }

    pub fn clear(&mut self) {
        self.entries.clear();
        self.mean.clear();
    }

    /// Unconditional append, evicting the oldest entry when full.
    pub fn push(&mut self, values: Vec<f64>) -> Result<()> {
        self.push_slice(&values)
    }

    fn push_slice(&mut self, values: &[f64]) -> Result<()> {
        if let Some(first) = self.entries.front() {
            check_dim(first.len(), values.len())?;
        }
        let mut slot = if self.entries.len() == self.capacity {
            self.entries.pop_front().expect("full bank")
        } else {
            Vec::with_capacity(values.len())
        };
        slot.clear();
        slot.extend_from_slice(values);
        self.entries.push_back(slot);
        self.refresh_mean();
        Ok(())
    }

    fn refresh_mean(&mut self) {
        self.mean.clear();
        self.mean.resize(self.entries[0].len(), 0.0);
        for entry in &self.entries {
            for (a, v) in self.mean.iter_mut().zip(entry) {
                *a += v;
            }
        }
        let inv = 1.0 / self.entries.len() as f64;
        self.mean.iter_mut().for_each(|a| *a *= inv);
    }

    /// Appends `x` only if it looks more like foreground than background
    /// (strictly). Returns whether it was appended.
    pub fn update(
        &mut self,
        x: &FrameFeature,
        foreground: &[f64],
        background: &[f64],
    ) -> Result<bool> {
        let fg = cosine(x.values(), foreground)?;
        let bg = cosine(x.values(), background)?;
        if bg < fg {
            self.push_slice(x.values())?;
            Ok(true)
        } else {
            Ok(false)
        }
    }

    /// Arithmetic mean over the `m` stored entries.
    pub fn mean(&self) -> Result<Vec<f64>> {
        self.mean_ref().map(<[f64]>::to_vec)
    }

    pub(crate) fn mean_ref(&self) -> Result<&[f64]> {
        if self.entries.is_empty() {
            return Err(Error::EmptyMemory);
        }
        Ok(&self.mean)
    }

    /// Recency weight of entry `i` (0-based, oldest first) in a bank of `m`.
    ///
    /// Literal weights are `1 / (m * (m - i))`, which sum to `H_m / m`.
    /// Normalized weights are rescaled to sum to one.
    pub fn recency_weights(m: usize, normalized: bool) -> Vec<f64> {
        let mut w: Vec<f64> = (0..m).map(|i| 1.0 / (m as f64 * (m - i) as f64)).collect();
        if normalized {
            let total: f64 = w.iter().sum();
            w.iter_mut().for_each(|v| *v /= total);
        }
        w
    }

    /// Recency-weighted summary, most recent entries weighted highest.
    pub fn weighted(&self, normalized: bool) -> Result<Vec<f64>> {
        let m = self.entries.len();
        if m == 0 {
            return Err(Error::EmptyMemory);
        }
        let mf = m as f64;
        // literal weights sum to H_m / m
        let norm = if normalized {
            (0..m).map(|i| 1.0 / (mf * (m - i) as f64)).sum::<f64>()
        } else {
            1.0
        };
        let mut acc = vec![0.0; self.entries[0].len()];
        for (i, entry) in self.entries.iter().enumerate() {
            let w = 1.0 / (mf * (m - i) as f64) / norm;
            for (a, v) in acc.iter_mut().zip(entry) {
                *a += w * v;
            }
        }
        Ok(acc)
    }
}

/// Output of one enhancement step.
#[derive(Debug, Clone, PartialEq)]
pub struct Enhanced {
    pub fused: Vec<f64>,
    /// Fusion coefficient in `[0, 0.5]`; zero when the gate is closed.
    pub lambda: f64,
}

/// Maps a cosine from `[-1, 1]` onto `[0, 1]`.
pub fn unit_interval(cos: f64) -> f64 {
    (cos + 1.0) / 2.0
}

/// Blends the current feature with the memory summary.
///
/// Expects `bank` to already include this step's update. The gate opens only
/// when the cosine to the memory mean strictly exceeds the fusion threshold;
/// otherwise the feature passes through untouched.
pub fn enhance_feature(
    bank: &MemoryBank,
    x: &FrameFeature,
    cfg: &LocalizerConfig,
) -> Result<Enhanced> {
    let passthrough = || Enhanced {
        fused: x.values().to_vec(),
        lambda: 0.0,
    };
    if bank.is_empty() {
        return Ok(passthrough());
    }
    let mean = bank.mean_ref()?;
    check_dim(mean.len(), x.dim())?;
    let similarity = match cosine(x.values(), mean) {
        Ok(c) => c,
        // memory that cancels to zero carries no direction
        Err(Error::ZeroNorm) => return Ok(passthrough()),
        Err(e) => return Err(e),
    };
    if similarity <= cfg.fusion_threshold {
        return Ok(passthrough());
    }
    let lambda = 0.5 * unit_interval(similarity);
    let recent = bank.weighted(cfg.normalized_memory_weights)?;
    let mut fused: Vec<f64> = x
        .values()
        .iter()
        .zip(&recent)
        .map(|(xv, qv)| (1.0 - lambda) * xv + lambda * qv)
        .collect();
    if cfg.renormalize_fused {
        let norm = l2_norm(&fused);
        if norm > 0.0 {
            fused.iter_mut().for_each(|v| *v /= norm);
        }
    }
    Ok(Enhanced { fused, lambda })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn feat(values: &[f64]) -> FrameFeature {
        FrameFeature::new(0, values.to_vec()).unwrap()
    }

    fn bank_of(cap: usize, rows: &[&[f64]]) -> MemoryBank {
        let mut bank = MemoryBank::new(cap).unwrap();
        for r in rows {
            bank.push(r.to_vec()).unwrap();
        }
        bank
    }

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-12 * b.abs().max(1.0)
    }

    #[test]
    fn cosine_examples() {
        assert_eq!(cosine(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 0.0);
        assert_eq!(cosine(&[1.0, 0.0], &[3.0, 0.0]).unwrap(), 1.0);
        assert!(close(
            cosine(&[1.0, 2.0, 2.0], &[2.0, 1.0, 2.0]).unwrap(),
            8.0 / 9.0
        ));
        assert!(matches!(
            cosine(&[0.0, 0.0], &[1.0, 0.0]),
            Err(Error::ZeroNorm)
        ));
        assert!(cosine(&[1.0], &[1.0, 0.0]).is_err());
    }

    #[test]
    fn update_foreground_appends() {
        // fg direction (1,0), bg direction (0,1); x has cos 0.9-ish with fg
        let mut bank = bank_of(10, &[&[1.0, 0.0][..]; 5]);
        let appended = bank
            .update(&feat(&[0.9, 0.3]), &[1.0, 0.0], &[0.0, 1.0])
            .unwrap();
        assert!(appended);
        assert_eq!(bank.len(), 6);
        assert_eq!(bank.entries().last().unwrap(), &[0.9, 0.3]);
    }

    #[test]
    fn update_background_and_tie_skip() {
        let mut bank = bank_of(10, &[&[1.0, 0.0]]);
        let before = bank.clone();
        assert!(!bank
            .update(&feat(&[0.4, 0.5]), &[1.0, 0.0], &[0.0, 1.0])
            .unwrap());
        assert_eq!(bank, before);
        assert!(!bank
            .update(&feat(&[1.0, 1.0]), &[1.0, 0.0], &[0.0, 1.0])
            .unwrap());
        assert_eq!(bank, before);
    }

    #[test]
    fn fifo_eviction() {
        let mut bank = bank_of(3, &[&[1.0, 0.1], &[1.0, 0.2], &[1.0, 0.3]]);
        bank.update(&feat(&[1.0, 0.4]), &[1.0, 0.0], &[0.0, 1.0])
            .unwrap();
        let rows: Vec<_> = bank.entries().map(|r| r[1]).collect();
        assert_eq!(rows, vec![0.2, 0.3, 0.4]);
    }

    #[test]
    fn update_dimension_mismatch() {
        let mut bank = MemoryBank::new(2).unwrap();
        assert!(bank
            .update(&feat(&[1.0, 0.0, 0.0]), &[1.0, 0.0], &[0.0, 1.0])
            .is_err());
    }

    #[test]
    fn mean_examples() {
        let v = [0.3, -0.7];
        let m = bank_of(5, &[&v, &v, &v]).mean().unwrap();
        assert!(close(m[0], 0.3) && close(m[1], -0.7), "{m:?}");
        assert_eq!(
            bank_of(5, &[&[1.0, 0.0], &[0.0, 1.0]]).mean().unwrap(),
            vec![0.5, 0.5]
        );
        assert_eq!(
            bank_of(5, &[&[2.0, 0.0], &[0.0, 4.0], &[1.0, 2.0]])
                .mean()
                .unwrap(),
            vec![1.0, 2.0]
        );
        assert!(matches!(
            MemoryBank::new(3).unwrap().mean(),
            Err(Error::EmptyMemory)
        ));
    }

    #[test]
    fn weighted_examples() {
        let v = [0.6, 0.8];
        assert_eq!(bank_of(4, &[&v]).weighted(false).unwrap(), v.to_vec());

        let two = bank_of(4, &[&[1.0, 0.0], &[0.0, 1.0]])
            .weighted(false)
            .unwrap();
        assert!(close(two[0], 0.25) && close(two[1], 0.5));

        let three = bank_of(4, &[&v, &v, &v]).weighted(false).unwrap();
        assert!(close(three[0], 11.0 / 18.0 * 0.6));
        assert!(close(three[1], 11.0 / 18.0 * 0.8));

        let normalized = bank_of(4, &[&v, &v, &v]).weighted(true).unwrap();
        assert!(close(normalized[0], 0.6) && close(normalized[1], 0.8));
        assert!(MemoryBank::new(1).unwrap().weighted(true).is_err());
    }

    #[test]
    fn literal_weights_shrink_by_harmonic_ratio() {
        for (m, harmonic) in [(2usize, 1.5f64), (3, 11.0 / 6.0), (5, 137.0 / 60.0)] {
            let v = [0.0, 1.0, 0.0];
            let bank = bank_of(m, &vec![&v[..]; m]);
            let norm = l2_norm(&bank.weighted(false).unwrap());
            assert!(close(norm, harmonic / m as f64), "m={m}");
            assert!(norm < 1.0);
        }
    }

    #[test]
    fn gate_closed_passes_feature_through() {
        // cos(x, mean) = 0.7 < 0.8
        let x = [0.7, (1.0f64 - 0.49).sqrt()];
        let bank = bank_of(4, &[&[1.0, 0.0]]);
        let out = enhance_feature(&bank, &feat(&x), &LocalizerConfig::default()).unwrap();
        assert_eq!(out.lambda, 0.0);
        assert_eq!(out.fused, x.to_vec());

        let empty = MemoryBank::new(4).unwrap();
        let out = enhance_feature(&empty, &feat(&x), &LocalizerConfig::default()).unwrap();
        assert_eq!(out.fused, x.to_vec());
    }

    #[test]
    fn gate_open_at_unit_cosine() {
        let cfg = LocalizerConfig {
            renormalize_fused: false,
            ..LocalizerConfig::default()
        };
        let x = [2.0, 0.0];
        let bank = bank_of(4, &[&[1.0, 0.0], &[1.0, 0.0]]);
        let out = enhance_feature(&bank, &feat(&x), &cfg).unwrap();
        assert_eq!(out.lambda, 0.5);
        // q~ = (1/2)(1/2 + 1) * (1,0) = (0.75, 0)
        assert!(close(out.fused[0], 0.5 * 2.0 + 0.5 * 0.75));
    }

    #[test]
    fn lambda_at_cos_point_nine() {
        let x = [0.9, (1.0f64 - 0.81).sqrt()];
        let bank = bank_of(4, &[&[1.0, 0.0]]);
        let out = enhance_feature(&bank, &feat(&x), &LocalizerConfig::default()).unwrap();
        assert!(close(out.lambda, 0.475));
        assert!(close(l2_norm(&out.fused), 1.0));
    }

    #[test]
    fn gate_is_strict_at_threshold() {
        let cfg = LocalizerConfig {
            fusion_threshold: 1.0,
            ..LocalizerConfig::default()
        };
        let bank = bank_of(4, &[&[1.0, 0.0]]);
        let out = enhance_feature(&bank, &feat(&[3.0, 0.0]), &cfg).unwrap();
        assert_eq!(out.lambda, 0.0);
    }

    #[test]
    fn cancelling_memory_keeps_gate_closed() {
        let bank = bank_of(4, &[&[1.0, 0.0], &[-1.0, 0.0]]);
        let out = enhance_feature(&bank, &feat(&[1.0, 0.0]), &LocalizerConfig::default()).unwrap();
        assert_eq!(out.lambda, 0.0);
    }
}
