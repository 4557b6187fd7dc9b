//! Fitted classifiers and their evaluation.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::data::Dataset;
use super::io::write_atomic;
use super::metrics::{classification_metrics, Metrics};
use crate::baselines::{BasisKind, BasisTransform};
use crate::error::{Error, Result};
use crate::features::SignatureDesign;
use crate::linear_model::{predict_label, predict_proba_rows, Coefficients, StandardizationStats};
use crate::sigcore::{word_at, word_name};

/// Model variants compared in the experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    /// Signature of the functional channels plus scalar covariates.
    Pslr,
    /// Signature only; scalars dropped.
    Signature,
    /// Scalars only (order fixed at 0).
    Scalar,
    Bspline,
    Fourier,
    Fpca,
}

impl ModelKind {
    pub const ALL: [ModelKind; 6] = [
        ModelKind::Pslr,
        ModelKind::Signature,
        ModelKind::Scalar,
        ModelKind::Bspline,
        ModelKind::Fourier,
        ModelKind::Fpca,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Pslr => "pslr",
            ModelKind::Signature => "signature",
            ModelKind::Scalar => "scalar",
            ModelKind::Bspline => "bspline",
            ModelKind::Fourier => "fourier",
            ModelKind::Fpca => "fpca",
        }
    }

    pub fn basis(self) -> Option<BasisKind> {
        match self {
            ModelKind::Bspline => Some(BasisKind::Bspline),
            ModelKind::Fourier => Some(BasisKind::Fourier),
            ModelKind::Fpca => Some(BasisKind::Fpca),
            _ => None,
        }
    }

    pub fn uses_scalars(self) -> bool {
        self != ModelKind::Signature
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ModelKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown model `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "map", rename_all = "lowercase")]
pub enum FeatureMap {
    Signature { order: usize, use_scalars: bool },
    Basis { transform: BasisTransform },
}

/// How a coefficient is labeled in reports: its signature level, or a
/// block name such as `scalar`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Block {
    Level(usize),
    Named(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientLabel {
    pub index: usize,
    pub level_or_scalar: Block,
    pub name: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedModel {
    pub kind: ModelKind,
    pub feature_map: FeatureMap,
    pub standardization: StandardizationStats,
    pub coefficients: Coefficients,
    pub lambda: f64,
    pub c_pen: Option<f64>,
    pub p_hat: Option<usize>,
    pub channels: usize,
    /// Scalars the model consumes; empty when it ignores them.
    pub scalar_names: Vec<String>,
}

impl FittedModel {
    /// Raw (unstandardized) feature rows of `dataset`.
    pub fn features(&self, dataset: &Dataset) -> Result<DMatrix<f64>> {
        if dataset.channels() != self.channels {
            return Err(Error::DimensionMismatch {
                expected: self.channels,
                found: dataset.channels(),
            });
        }
        match &self.feature_map {
            FeatureMap::Signature { order, use_scalars } => {
                let stripped;
                let data = if *use_scalars {
                    dataset
                } else {
                    stripped = dataset.without_scalars();
                    &stripped
                };
                if data.q() != self.scalar_names.len() {
                    return Err(Error::DimensionMismatch {
                        expected: self.scalar_names.len(),
                        found: data.q(),
                    });
                }
                SignatureDesign::new(data)?.design(*order)
            }
            FeatureMap::Basis { transform } => transform.transform(dataset),
        }
    }

    pub fn predict_proba(&self, dataset: &Dataset) -> Result<Vec<f64>> {
        let x = self.standardization.transform(&self.features(dataset)?)?;
        predict_proba_rows(&self.coefficients, &x)
    }

    pub fn predict(&self, dataset: &Dataset) -> Result<Vec<u8>> {
        Ok(self.predict_proba(dataset)?.into_iter().map(predict_label).collect())
    }

    /// One label per coefficient: signature words by level, then scalars.
    pub fn coefficient_labels(&self) -> Vec<CoefficientLabel> {
        let values = self.coefficients.as_slice();
        let block_len = self.coefficients.signature_len();
        values
            .iter()
            .enumerate()
            .map(|(index, &value)| {
                let (level_or_scalar, name) = if index >= block_len {
                    let name = self
                        .scalar_names
                        .get(index - block_len)
                        .cloned()
                        .unwrap_or_else(|| format!("z_{}", index - block_len + 1));
                    (Block::Named("scalar".into()), name)
                } else {
                    match &self.feature_map {
                        FeatureMap::Signature { .. } => {
                            let word = word_at(self.channels + 1, index);
                            (Block::Level(word.len()), word_name(&word))
                        }
                        FeatureMap::Basis { transform } => {
                            let k = transform.k();
                            (
                                Block::Named("functional".into()),
                                format!("{}[channel {}][{}]", transform.kind(), index / k, index % k),
                            )
                        }
                    }
                };
                CoefficientLabel {
                    index,
                    level_or_scalar,
                    name,
                    value,
                }
            })
            .collect()
    }

    /// `Σ|θ|` per signature level `0..=p̂` (empty for basis models).
    pub fn level_magnitudes(&self) -> Vec<(usize, f64)> {
        let mut sums: Vec<f64> = Vec::new();
        for c in self.coefficient_labels() {
            if let Block::Level(level) = c.level_or_scalar {
                if sums.len() <= level {
                    sums.resize(level + 1, 0.0);
                }
                sums[level] += c.value.abs();
            }
        }
        sums.into_iter().enumerate().collect()
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut bytes = serde_json::to_vec_pretty(self)?;
        bytes.push(b'\n');
        write_atomic(path, &bytes)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Ok(serde_json::from_slice(&std::fs::read(path)?)?)
    }
}

/// Accuracy and positive-class F1 at threshold 0.5.
pub fn evaluate(model: &FittedModel, test: &Dataset) -> Result<Metrics> {
    classification_metrics(&model.predict(test)?, &test.labels())
}
