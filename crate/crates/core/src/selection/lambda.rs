//! Cross-validated choice of the lasso weight.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::cv::{fold_indices, stratified_folds};
use super::slope::log_grid;
use crate::error::{Error, Result};
use crate::features::{select_labels, select_rows, SignatureDesign};
use crate::harness::Dataset;
use crate::linear_model::{empirical_risk, fit_lasso_logistic_with, LassoOptions, StandardizationStats};
use crate::sigcore::sig_dim;

/// Order at which the lasso weight is tuned.
pub const TUNING_ORDER: usize = 1;

/// 20 log-spaced values over `[1e-4, 1]`.
pub fn default_lambda_grid() -> Vec<f64> {
    log_grid(1e-4, 1.0, 20)
}

/// Raw (unstandardized) features of one fold.
#[derive(Debug, Clone)]
pub struct FoldData {
    pub train: DMatrix<f64>,
    pub train_labels: Vec<u8>,
    pub validation: DMatrix<f64>,
    pub validation_labels: Vec<u8>,
    pub signature_len: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaSearch {
    /// Deduplicated grid, largest first.
    pub grid: Vec<f64>,
    pub mean_risk: Vec<f64>,
    pub lambda: f64,
}

fn prepare_grid(grid: &[f64]) -> Result<Vec<f64>> {
    if grid.is_empty() {
        return Err(Error::invalid("empty lambda grid"));
    }
    if let Some(bad) = grid.iter().find(|l| !(**l >= 0.0) || !l.is_finite()) {
        return Err(Error::invalid(format!("lambda must be finite and >= 0, got {bad}")));
    }
    let mut g = grid.to_vec();
    g.sort_by(|a, b| b.total_cmp(a));
    g.dedup();
    Ok(g)
}

/// Validation risks of one fold along the (descending) grid, warm-starting
/// each fit from the previous one.
fn fold_path(data: &FoldData, grid: &[f64]) -> Result<Vec<f64>> {
    let stats = StandardizationStats::fit(&data.train)?;
    let train = stats.transform(&data.train)?;
    let validation = stats.transform(&data.validation)?;
    let options = LassoOptions::default();
    let mut init: Option<Vec<f64>> = None;
    grid.iter()
        .map(|&lambda| {
            let fit = fit_lasso_logistic_with(
                &train,
                &data.train_labels,
                lambda,
                data.signature_len,
                init.as_deref(),
                &options,
            )?;
            let risk = empirical_risk(fit.coefficients.as_slice(), &validation, &data.validation_labels)?;
            init = Some(fit.coefficients.into_values());
            Ok(risk)
        })
        .collect()
}

/// Stratified k-fold search over `grid`. `build` produces the raw features of
/// a fold from its training and validation indices, so any feature state can
/// be fitted on the training part only. Ties go to the larger `λ`.
pub fn cross_validate_lambda<F>(labels: &[u8], folds: usize, seed: u64, grid: &[f64], build: F) -> Result<LambdaSearch>
where
    F: Fn(&[usize], &[usize]) -> Result<FoldData> + Sync,
{
    let grid = prepare_grid(grid)?;
    if labels.len() < folds {
        return Err(Error::invalid(format!("{} samples cannot fill {folds} folds", labels.len())));
    }
    let assignment = stratified_folds(labels, folds, seed)?;
    let per_fold = (0..folds)
        .into_par_iter()
        .map(|k| {
            let (train, validation) = fold_indices(&assignment, k);
            fold_path(&build(&train, &validation)?, &grid)
        })
        .collect::<Result<Vec<_>>>()?;
    let mean_risk: Vec<f64> = (0..grid.len())
        .map(|g| per_fold.iter().map(|r| r[g]).sum::<f64>() / folds as f64)
        .collect();
    let mut best = 0;
    for g in 1..grid.len() {
        if mean_risk[g] < mean_risk[best] {
            best = g;
        }
    }
    Ok(LambdaSearch {
        lambda: grid[best],
        grid,
        mean_risk,
    })
}

/// Full search record for [`tune_lambda`].
pub fn tune_lambda_search(train: &Dataset, folds: usize, grid: &[f64], seed: u64) -> Result<LambdaSearch> {
    tune_lambda_search_at(train, TUNING_ORDER, folds, grid, seed)
}

/// Cross-validated `λ` on the signature-plus-scalar design at `order`.
pub fn tune_lambda_search_at(train: &Dataset, order: usize, folds: usize, grid: &[f64], seed: u64) -> Result<LambdaSearch> {
    train.require_both_classes("lambda tuning")?;
    let design = SignatureDesign::new(train)?;
    let x = design.design(order)?;
    let sig_len = sig_dim(design.alphabet(), order)?;
    let labels = design.labels();
    cross_validate_lambda(labels, folds, seed, grid, |tr, va| {
        Ok(FoldData {
            train: select_rows(&x, tr),
            train_labels: select_labels(labels, tr),
            validation: select_rows(&x, va),
            validation_labels: select_labels(labels, va),
            signature_len: sig_len,
        })
    })
}

/// `λ` with the smallest mean validation risk at order 1.
pub fn tune_lambda(train: &Dataset, folds: usize, grid: &[f64], seed: u64) -> Result<f64> {
    Ok(tune_lambda_search(train, folds, grid, seed)?.lambda)
}
