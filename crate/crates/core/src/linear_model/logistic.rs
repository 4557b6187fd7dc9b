//! Logistic loss, its gradient and predictions.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `log(1 + e^s)` without overflow.
#[inline]
pub fn softplus(s: f64) -> f64 {
    s.max(0.0) + (-s.abs()).exp().ln_1p()
}

/// `1 / (1 + e^{-s})` without overflow.
#[inline]
pub fn sigmoid(s: f64) -> f64 {
    if s >= 0.0 {
        1.0 / (1.0 + (-s).exp())
    } else {
        let e = s.exp();
        e / (1.0 + e)
    }
}

/// Per-sample logistic loss `-y s + log(1 + e^s)`.
#[inline]
pub fn logistic_loss(score: f64, label: u8) -> f64 {
    softplus(score) - f64::from(label) * score
}

/// Parameter vector split into a signature block followed by a scalar block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Coefficients {
    values: Vec<f64>,
    signature_len: usize,
}

impl Coefficients {
    pub fn new(values: Vec<f64>, signature_len: usize) -> Result<Self> {
        if signature_len > values.len() {
            return Err(Error::invalid(format!(
                "signature block of length {signature_len} exceeds {} coefficients",
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("coefficients must be finite"));
        }
        Ok(Self {
            values,
            signature_len,
        })
    }

    pub fn zeros(signature_len: usize, scalar_len: usize) -> Self {
        Self {
            values: vec![0.0; signature_len + scalar_len],
            signature_len,
        }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn signature_len(&self) -> usize {
        self.signature_len
    }

    /// The signature block (β).
    pub fn signature_block(&self) -> &[f64] {
        &self.values[..self.signature_len]
    }

    /// The scalar block (γ).
    pub fn scalar_block(&self) -> &[f64] {
        &self.values[self.signature_len..]
    }

    pub fn l1_norm(&self) -> f64 {
        self.values.iter().map(|v| v.abs()).sum()
    }
}

/// A single design row: signature block then scalar block.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    values: Vec<f64>,
    signature_len: usize,
}

impl FeatureVector {
    pub fn new(signature: &[f64], scalars: &[f64]) -> Self {
        let mut values = Vec::with_capacity(signature.len() + scalars.len());
        values.extend_from_slice(signature);
        values.extend_from_slice(scalars);
        Self {
            values,
            signature_len: signature.len(),
        }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn signature_block(&self) -> &[f64] {
        &self.values[..self.signature_len]
    }

    pub fn scalar_block(&self) -> &[f64] {
        &self.values[self.signature_len..]
    }
}

pub(crate) fn check_labels(labels: &[u8]) -> Result<()> {
    match labels.iter().find(|&&y| y > 1) {
        Some(&bad) => Err(Error::NonBinaryLabel(bad)),
        None => Ok(()),
    }
}

fn check_dims(theta: &[f64], features: &DMatrix<f64>, labels: &[u8]) -> Result<()> {
    if theta.len() != features.ncols() {
        return Err(Error::DimensionMismatch {
            expected: features.ncols(),
            found: theta.len(),
        });
    }
    if labels.len() != features.nrows() {
        return Err(Error::DimensionMismatch {
            expected: features.nrows(),
            found: labels.len(),
        });
    }
    check_labels(labels)
}

/// `X θ`, accumulated column by column.
pub fn scores(theta: &[f64], features: &DMatrix<f64>) -> Vec<f64> {
    let mut s = vec![0.0; features.nrows()];
    for (col, &t) in features.column_iter().zip(theta) {
        if t == 0.0 {
            continue;
        }
        for (si, &x) in s.iter_mut().zip(col.iter()) {
            *si += x * t;
        }
    }
    s
}

/// Average logistic loss of `theta` on `(features, labels)`.
pub fn empirical_risk(theta: &[f64], features: &DMatrix<f64>, labels: &[u8]) -> Result<f64> {
    check_dims(theta, features, labels)?;
    if labels.is_empty() {
        return Err(Error::invalid("empirical risk of an empty sample"));
    }
    let s = scores(theta, features);
    let total: f64 = s
        .iter()
        .zip(labels)
        .map(|(&si, &y)| logistic_loss(si, y))
        .sum();
    Ok(total / labels.len() as f64)
}

/// Gradient of [`empirical_risk`] with respect to `theta`.
pub fn risk_gradient(theta: &[f64], features: &DMatrix<f64>, labels: &[u8]) -> Result<Vec<f64>> {
    check_dims(theta, features, labels)?;
    if labels.is_empty() {
        return Err(Error::invalid("gradient of an empty sample"));
    }
    let n = labels.len() as f64;
    let residual: Vec<f64> = scores(theta, features)
        .iter()
        .zip(labels)
        .map(|(&s, &y)| sigmoid(s) - f64::from(y))
        .collect();
    Ok(features
        .column_iter()
        .map(|col| col.iter().zip(&residual).map(|(x, r)| x * r).sum::<f64>() / n)
        .collect())
}

/// Largest violation of the lasso optimality conditions at `theta`.
///
/// Zero coordinates need `|g_j| <= λ`; non-zero ones need
/// `g_j + λ sign(θ_j) = 0`. Everything is recomputed from scratch.
pub fn kkt_violation(
    theta: &[f64],
    features: &DMatrix<f64>,
    labels: &[u8],
    lambda: f64,
) -> Result<f64> {
    let g = risk_gradient(theta, features, labels)?;
    Ok(theta
        .iter()
        .zip(&g)
        .map(|(&t, &gj)| {
            if t == 0.0 {
                (gj.abs() - lambda).max(0.0)
            } else {
                (gj + lambda * t.signum()).abs()
            }
        })
        .fold(0.0, f64::max))
}

/// `P(y = 1)` for one feature vector.
pub fn predict_proba(theta: &Coefficients, feature: &FeatureVector) -> Result<f64> {
    if theta.len() != feature.values.len() {
        return Err(Error::DimensionMismatch {
            expected: theta.len(),
            found: feature.values.len(),
        });
    }
    if theta.signature_len() != feature.signature_len {
        return Err(Error::DimensionMismatch {
            expected: theta.signature_len(),
            found: feature.signature_len,
        });
    }
    Ok(sigmoid(dot(theta.as_slice(), feature.as_slice())))
}

/// `P(y = 1)` for every row of `features`.
pub fn predict_proba_rows(theta: &Coefficients, features: &DMatrix<f64>) -> Result<Vec<f64>> {
    if theta.len() != features.ncols() {
        return Err(Error::DimensionMismatch {
            expected: theta.len(),
            found: features.ncols(),
        });
    }
    Ok(scores(theta.as_slice(), features)
        .into_iter()
        .map(sigmoid)
        .collect())
}

/// Threshold a probability at 0.5.
pub fn predict_label(probability: f64) -> u8 {
    u8::from(probability >= 0.5)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_theta_gives_log_two() {
        let x = DMatrix::from_row_slice(3, 2, &[1.0, 4.0, 1.0, -2.0, 1.0, 0.5]);
        let r = empirical_risk(&[0.0, 0.0], &x, &[1, 0, 1]).unwrap();
        assert!((r - std::f64::consts::LN_2).abs() < 1e-15);
    }

    #[test]
    fn saturated_correct_predictions() {
        let x = DMatrix::from_element(4, 1, 30.0);
        let r = empirical_risk(&[1.0], &x, &[1, 1, 1, 1]).unwrap();
        assert!(r < 1e-12);
    }

    #[test]
    fn single_sample_formula() {
        let x = DMatrix::from_element(1, 1, 1.0);
        let r = empirical_risk(&[1.0], &x, &[0]).unwrap();
        assert!((r - 1.313_261_687_518_222_8).abs() < 1e-12);
    }

    #[test]
    fn large_scores_are_stable() {
        assert!(softplus(700.0).is_finite());
        assert!((softplus(-700.0)).abs() < 1e-300);
        assert_eq!(sigmoid(0.0), 0.5);
        assert!(sigmoid(40.0) >= 1.0 - 1e-17);
        assert!(sigmoid(-800.0) >= 0.0);
        let x = DMatrix::from_element(1, 1, 700.0);
        assert!(empirical_risk(&[1.0], &x, &[0]).unwrap().is_finite());
    }

    #[test]
    fn rejects_bad_inputs() {
        let x = DMatrix::from_element(2, 2, 1.0);
        assert!(matches!(
            empirical_risk(&[0.0], &x, &[0, 1]),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(
            empirical_risk(&[0.0, 0.0], &x, &[0, 2]),
            Err(Error::NonBinaryLabel(2))
        ));
        assert!(empirical_risk(&[0.0, 0.0], &x, &[0]).is_err());
    }

    #[test]
    fn predict_checks_blocks() {
        let theta = Coefficients::new(vec![0.0, 1.0, 2.0], 2).unwrap();
        let fv = FeatureVector::new(&[1.0, 0.0], &[0.0]);
        assert_eq!(predict_proba(&theta, &fv).unwrap(), 0.5);
        let wrong = FeatureVector::new(&[1.0], &[0.0, 0.0]);
        assert!(predict_proba(&theta, &wrong).is_err());
        assert_eq!(predict_label(0.5), 1);
        assert_eq!(predict_label(0.49), 0);
    }

    #[test]
    fn coefficients_reject_non_finite() {
        assert!(Coefficients::new(vec![f64::NAN], 1).is_err());
        assert!(Coefficients::new(vec![1.0], 2).is_err());
        let c = Coefficients::new(vec![1.0, -2.0, 3.0], 1).unwrap();
        assert_eq!(c.signature_block(), &[1.0]);
        assert_eq!(c.scalar_block(), &[-2.0, 3.0]);
        assert_eq!(c.l1_norm(), 6.0);
    }
}
