use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Column moments fitted on training features.
///
/// Columns whose population deviation vanishes (the order-0 signature term,
/// for instance) are flagged constant and passed through unchanged.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StandardizationStats {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
    pub constant: Vec<bool>,
}

fn is_constant(mean: f64, sd: f64) -> bool {
    sd <= 1e-10 * (1.0 + mean.abs())
}

impl StandardizationStats {
    pub fn fit(features: &DMatrix<f64>) -> Result<Self> {
        let n = features.nrows();
        if n < 2 {
            return Err(Error::invalid(format!(
                "standardization needs at least 2 rows, got {n}"
            )));
        }
        let mut mean = Vec::with_capacity(features.ncols());
        let mut scale = Vec::with_capacity(features.ncols());
        let mut constant = Vec::with_capacity(features.ncols());
        for col in features.column_iter() {
            let m = col.iter().sum::<f64>() / n as f64;
            let var = col.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / n as f64;
            let sd = var.sqrt();
            let flat = is_constant(m, sd);
            mean.push(m);
            scale.push(if flat { 0.0 } else { sd });
            constant.push(flat);
        }
        Ok(Self {
            mean,
            scale,
            constant,
        })
    }

    pub fn len(&self) -> usize {
        self.mean.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mean.is_empty()
    }

    pub fn transform(&self, features: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        if features.ncols() != self.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                found: features.ncols(),
            });
        }
        let mut out = features.clone();
        for (j, mut col) in out.column_iter_mut().enumerate() {
            if self.constant[j] {
                continue;
            }
            let (m, s) = (self.mean[j], self.scale[j]);
            col.apply(|v| *v = (*v - m) / s);
        }
        Ok(out)
    }

    pub fn transform_row(&self, row: &[f64]) -> Result<Vec<f64>> {
        if row.len() != self.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                found: row.len(),
            });
        }
        Ok(row
            .iter()
            .enumerate()
            .map(|(j, &v)| {
                if self.constant[j] {
                    v
                } else {
                    (v - self.mean[j]) / self.scale[j]
                }
            })
            .collect())
    }

    /// Stats restricted to the given columns, in the given order.
    pub fn select(&self, columns: &[usize]) -> Self {
        Self {
            mean: columns.iter().map(|&j| self.mean[j]).collect(),
            scale: columns.iter().map(|&j| self.scale[j]).collect(),
            constant: columns.iter().map(|&j| self.constant[j]).collect(),
        }
    }
}

/// Fit on `features` and return the standardized copy alongside the stats.
pub fn standardize_fit(features: &DMatrix<f64>) -> Result<(StandardizationStats, DMatrix<f64>)> {
    let stats = StandardizationStats::fit(features)?;
    let out = stats.transform(features)?;
    Ok((stats, out))
}
