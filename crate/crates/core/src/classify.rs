//! Background-aware K-way classification.
//!
//! Scores are cosine similarities multiplied by a logit scale. Each class
//! score is then mixed with the background score: a class that clearly
//! beats the background keeps `k - r`, an ambiguous one is halved and
//! penalized.

use crate::error::{Error, Result};
use crate::memory::{check_dim, dot, l2_norm};
use crate::model::TextBank;

/// Per-class scores for one timestep.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreVector {
    pub t: usize,
    pub values: Vec<f64>,
}

impl ScoreVector {
    pub fn new(t: usize, values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("score at t={t}")));
        }
        Ok(Self { t, values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn max(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

fn inverse_norm(z: &[f64]) -> Result<f64> {
    let norm = l2_norm(z);
    if norm == 0.0 || !norm.is_finite() {
        return Err(Error::ZeroNorm);
    }
    Ok(1.0 / norm)
}

/// `k[j] = scale * cos(z, class_j)`.
pub fn class_scores(t: usize, z: &[f64], bank: &TextBank, scale: f64) -> Result<ScoreVector> {
    check_dim(bank.dim(), z.len())?;
    let inv = inverse_norm(z)? * scale;
    // text rows are unit-norm already
    let values = bank
        .class_embeddings()
        .map(|row| dot(z, row) * inv)
        .collect();
    ScoreVector::new(t, values)
}

/// `r = scale * cos(z, background)`.
pub fn background_score(z: &[f64], bank: &TextBank, scale: f64) -> Result<f64> {
    check_dim(bank.dim(), z.len())?;
    Ok(dot(z, bank.background()) * inverse_norm(z)? * scale)
}

/// Mixing confidence for one class score, clamped to `[0.5, 1]`.
/// A zero denominator counts as equal evidence.
pub fn mixing_weight(k: f64, r: f64) -> f64 {
    let total = k + r;
    if total == 0.0 {
        0.5
    } else {
        (k / total).clamp(0.5, 1.0)
    }
}

/// Background-aware refinement: `y = a*k - (1 - a)*r` with `a = mixing_weight(k, r)`.
pub fn refine_scores(k: &ScoreVector, r: f64) -> Result<ScoreVector> {
    if !r.is_finite() {
        return Err(Error::NonFinite("background score".into()));
    }
    if k.values.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite(format!("class score at t={}", k.t)));
    }
    let values = k
        .values
        .iter()
        .map(|&kj| {
            let alpha = mixing_weight(kj, r);
            alpha * kj - (1.0 - alpha) * r
        })
        .collect();
    Ok(ScoreVector { t: k.t, values })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_hot_bank(k: usize, dim: usize) -> TextBank {
        let rows = (0..k)
            .map(|i| {
                let mut v = vec![0.0; dim];
                v[i] = 1.0;
                v
            })
            .collect();
        let mut fg = vec![0.0; dim];
        fg[dim - 2] = 1.0;
        let mut bg = vec![0.0; dim];
        bg[dim - 1] = 1.0;
        TextBank::new(
            (0..k).map(|i| format!("c{i}")).collect(),
            vec![String::new(); k],
            rows,
            fg,
            bg,
        )
        .unwrap()
    }

    fn refine_one(k: f64, r: f64) -> f64 {
        refine_scores(&ScoreVector::new(0, vec![k]).unwrap(), r)
            .unwrap()
            .values[0]
    }

    #[test]
    fn aligned_feature_scores_one_class() {
        let bank = one_hot_bank(4, 6);
        let mut z = vec![0.0; 6];
        z[2] = 0.37;
        let k = class_scores(0, &z, &bank, 100.0).unwrap();
        assert_eq!(k.values, vec![0.0, 0.0, 100.0, 0.0]);
    }

    #[test]
    fn unit_scale_gives_cosines() {
        let bank = one_hot_bank(2, 4);
        let k = class_scores(0, &[0.6, 0.8, 0.0, 0.0], &bank, 1.0).unwrap();
        assert!((k.values[0] - 0.6).abs() < 1e-15);
        assert!((k.values[1] - 0.8).abs() < 1e-15);
    }

    #[test]
    fn diagonal_feature() {
        let bank = TextBank::new(
            vec!["a".into(), "b".into()],
            vec![String::new(), String::new()],
            vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            vec![1.0, 1.0],
            vec![1.0, -1.0],
        )
        .unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let k = class_scores(0, &[h, h], &bank, 100.0).unwrap();
        for v in k.values {
            assert!((v - 100.0 / 2f64.sqrt()).abs() < 1e-9);
        }
    }

    #[test]
    fn zero_feature_rejected() {
        let bank = one_hot_bank(2, 4);
        assert!(matches!(
            class_scores(0, &[0.0; 4], &bank, 100.0),
            Err(Error::ZeroNorm)
        ));
        assert!(matches!(
            background_score(&[0.0; 4], &bank, 100.0),
            Err(Error::ZeroNorm)
        ));
        assert!(class_scores(0, &[1.0; 3], &bank, 100.0).is_err());
    }

    #[test]
    fn background_examples() {
        let bank = one_hot_bank(2, 4);
        assert_eq!(
            background_score(&[1.0, 0.0, 0.0, 0.0], &bank, 100.0).unwrap(),
            0.0
        );
        assert_eq!(
            background_score(&[0.0, 0.0, 0.0, 5.0], &bank, 100.0).unwrap(),
            100.0
        );
        let c = 0.25f64;
        let z = [(1.0 - c * c).sqrt(), 0.0, 0.0, c];
        assert!((background_score(&z, &bank, 100.0).unwrap() - 25.0).abs() < 1e-12);
    }

    #[test]
    fn refine_examples() {
        assert_eq!(refine_one(15.0, 15.0), 0.0);
        assert_eq!(refine_one(20.0, 0.0), 20.0);
        assert!((refine_one(30.0, 10.0) - 20.0).abs() < 1e-12);
        assert!((refine_one(5.0, 20.0) - -7.5).abs() < 1e-12);
    }

    #[test]
    fn refine_degenerate_and_negative() {
        // k + r = 0 treated as equal evidence
        assert_eq!(refine_one(-4.0, 4.0), -4.0);
        // negative background: weight clamps to 1, score untouched
        assert_eq!(refine_one(10.0, -3.0), 10.0);
        assert_eq!(mixing_weight(10.0, -3.0), 1.0);
        assert!(refine_scores(
            &ScoreVector {
                t: 0,
                values: vec![1.0]
            },
            f64::NAN
        )
        .is_err());
        assert!(refine_scores(
            &ScoreVector {
                t: 0,
                values: vec![f64::NAN]
            },
            1.0
        )
        .is_err());
    }
}
