//! Basis-coefficient and FPCA feature maps with scalars appended, and their
//! cross-validated fit.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::basis::{bspline_basis, common_grid, fourier_basis, project_values, projector, resample};
use super::fpca::FpcaChannel;
use crate::error::{Error, Result};
use crate::harness::{Dataset, Sample};
use crate::linear_model::{fit_lasso_logistic, Coefficients, StandardizationStats};
use crate::selection::{cross_validate_lambda, FoldData};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BasisKind {
    Bspline,
    Fourier,
    Fpca,
}

impl BasisKind {
    pub fn default_k_grid(self) -> Vec<usize> {
        match self {
            BasisKind::Bspline => (4..=15).collect(),
            BasisKind::Fourier => (3..=15).step_by(2).collect(),
            BasisKind::Fpca => (1..=10).collect(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            BasisKind::Bspline => "bspline",
            BasisKind::Fourier => "fourier",
            BasisKind::Fpca => "fpca",
        }
    }
}

impl fmt::Display for BasisKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BasisKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bspline" => Ok(BasisKind::Bspline),
            "fourier" => Ok(BasisKind::Fourier),
            "fpca" => Ok(BasisKind::Fpca),
            other => Err(Error::Config(format!("unknown basis kind `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "state", rename_all = "lowercase")]
enum BasisState {
    /// Row-major `k × grid` least-squares projector.
    Projection { projector: Vec<f64> },
    Fpca { channels: Vec<FpcaChannel> },
}

/// Fitted feature map: per-channel coefficients followed by the scalars.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasisTransform {
    kind: BasisKind,
    k: usize,
    channels: usize,
    q: usize,
    grid: Vec<f64>,
    state: BasisState,
}

fn resampled(sample: &Sample, channel: usize, grid: &[f64]) -> Vec<f64> {
    resample(&sample.channels[channel], grid)
}

fn sorted_channels(sample: &Sample) -> Sample {
    let mut s = sample.clone();
    s.channels.sort_by_key(|c| c.channel());
    s
}

impl BasisTransform {
    /// Fits any data-dependent state (FPCA only) on `train`.
    pub fn fit(kind: BasisKind, k: usize, train: &Dataset) -> Result<Self> {
        let grid = common_grid();
        let state = match kind {
            BasisKind::Bspline | BasisKind::Fourier => {
                let basis = if kind == BasisKind::Bspline {
                    bspline_basis(k, &grid)?
                } else {
                    fourier_basis(k, &grid)?
                };
                let p = projector(&basis)?;
                BasisState::Projection {
                    projector: p.transpose().as_slice().to_vec(),
                }
            }
            BasisKind::Fpca => {
                let samples: Vec<Sample> = train.samples().iter().map(sorted_channels).collect();
                let channels = (0..train.channels())
                    .into_par_iter()
                    .map(|j| {
                        let curves: Vec<Vec<f64>> = samples.iter().map(|s| resampled(s, j, &grid)).collect();
                        FpcaChannel::fit(&curves, k)
                    })
                    .collect::<Result<Vec<_>>>()?;
                BasisState::Fpca { channels }
            }
        };
        Ok(Self {
            kind,
            k,
            channels: train.channels(),
            q: train.q(),
            grid,
            state,
        })
    }

    pub fn kind(&self) -> BasisKind {
        self.kind
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Length of the functional block, `channels · k`.
    pub fn functional_len(&self) -> usize {
        self.channels * self.k
    }

    pub fn feature_len(&self) -> usize {
        self.functional_len() + self.q
    }

    pub fn fpca_channels(&self) -> Option<&[FpcaChannel]> {
        match &self.state {
            BasisState::Fpca { channels } => Some(channels),
            BasisState::Projection { .. } => None,
        }
    }

    pub fn transform_sample(&self, sample: &Sample) -> Result<Vec<f64>> {
        if sample.channels.len() != self.channels {
            return Err(Error::DimensionMismatch {
                expected: self.channels,
                found: sample.channels.len(),
            });
        }
        if sample.scalars.len() != self.q {
            return Err(Error::DimensionMismatch {
                expected: self.q,
                found: sample.scalars.len(),
            });
        }
        let sample = sorted_channels(sample);
        let mut out = Vec::with_capacity(self.feature_len());
        for j in 0..self.channels {
            let values = resampled(&sample, j, &self.grid);
            match &self.state {
                BasisState::Projection { projector } => {
                    let p = DMatrix::from_row_slice(self.k, self.grid.len(), projector);
                    out.extend(project_values(&p, &values));
                }
                BasisState::Fpca { channels } => out.extend(channels[j].scores(&values)?),
            }
        }
        out.extend_from_slice(&sample.scalars);
        Ok(out)
    }

    pub fn transform(&self, dataset: &Dataset) -> Result<DMatrix<f64>> {
        let rows = dataset
            .samples()
            .par_iter()
            .map(|s| self.transform_sample(s))
            .collect::<Result<Vec<_>>>()?;
        let m = self.feature_len();
        Ok(DMatrix::from_fn(rows.len(), m, |i, j| rows[i][j]))
    }
}

/// Final baseline classifier and the cross-validation record behind `k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineFit {
    pub transform: BasisTransform,
    pub standardization: StandardizationStats,
    pub coefficients: Coefficients,
    pub lambda: f64,
    /// `(k, mean validation risk)` for every candidate.
    pub cv_risk: Vec<(usize, f64)>,
}

impl BaselineFit {
    pub fn k(&self) -> usize {
        self.transform.k()
    }
}

/// Mean validation risk of `kind` at basis size `k` and weight `lambda`,
/// with the feature map refitted inside each fold.
pub fn baseline_cv_risk(kind: BasisKind, k: usize, train: &Dataset, folds: usize, lambda: f64, seed: u64) -> Result<f64> {
    baseline_lambda_search(kind, k, train, folds, &[lambda], seed).map(|s| s.mean_risk[0])
}

/// Cross-validated `λ` for `kind` at a fixed basis size `k`.
pub fn baseline_lambda_search(
    kind: BasisKind,
    k: usize,
    train: &Dataset,
    folds: usize,
    lambda_grid: &[f64],
    seed: u64,
) -> Result<crate::selection::LambdaSearch> {
    let labels = train.labels();
    cross_validate_lambda(&labels, folds, seed, lambda_grid, |tr, va| {
        let fold_train = train.subset(tr);
        let fold_val = train.subset(va);
        let t = BasisTransform::fit(kind, k, &fold_train)?;
        Ok(FoldData {
            train: t.transform(&fold_train)?,
            train_labels: fold_train.labels(),
            validation: t.transform(&fold_val)?,
            validation_labels: fold_val.labels(),
            signature_len: t.functional_len(),
        })
    })
}

/// Picks `k` from `k_grid` by stratified CV (ties to the smaller `k`), then
/// fits the feature map and the lasso on all of `train`.
pub fn fit_baseline(
    kind: BasisKind,
    train: &Dataset,
    k_grid: &[usize],
    folds: usize,
    lambda: f64,
    seed: u64,
) -> Result<BaselineFit> {
    train.require_both_classes("baseline fit")?;
    if k_grid.is_empty() {
        return Err(Error::invalid("empty basis-size grid"));
    }
    let mut ks = k_grid.to_vec();
    ks.sort_unstable();
    ks.dedup();
    let cv_risk = ks
        .iter()
        .map(|&k| Ok((k, baseline_cv_risk(kind, k, train, folds, lambda, seed)?)))
        .collect::<Result<Vec<_>>>()?;
    let mut best = 0;
    for i in 1..cv_risk.len() {
        if cv_risk[i].1 < cv_risk[best].1 {
            best = i;
        }
    }
    let transform = BasisTransform::fit(kind, cv_risk[best].0, train)?;
    let x = transform.transform(train)?;
    let standardization = StandardizationStats::fit(&x)?;
    let z = standardization.transform(&x)?;
    let coefficients = fit_lasso_logistic(&z, &train.labels(), lambda, transform.functional_len())?;
    Ok(BaselineFit {
        transform,
        standardization,
        coefficients,
        lambda,
        cv_risk,
    })
}
