//! Per-channel functional principal components on the common grid.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Mean curve and leading eigenvectors of one channel's sample covariance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FpcaChannel {
    pub mean: Vec<f64>,
    /// `k` unit vectors of grid length.
    pub components: Vec<Vec<f64>>,
    /// All eigenvalues, clamped at zero, largest first.
    pub eigenvalues: Vec<f64>,
}

impl FpcaChannel {
    /// `curves` are the training values of one channel on a shared grid.
    pub fn fit(curves: &[Vec<f64>], k: usize) -> Result<Self> {
        let n = curves.len();
        let g = curves.first().map_or(0, Vec::len);
        if k == 0 || k > n.min(g) {
            return Err(Error::invalid(format!(
                "FPCA needs 1 <= k <= min(n, grid) = {}, got {k}",
                n.min(g)
            )));
        }
        if curves.iter().any(|c| c.len() != g) {
            return Err(Error::invalid("FPCA curves must share one grid"));
        }
        let mean: Vec<f64> = (0..g)
            .map(|j| curves.iter().map(|c| c[j]).sum::<f64>() / n as f64)
            .collect();
        let centered = DMatrix::from_fn(n, g, |i, j| curves[i][j] - mean[j]);
        let cov = (centered.transpose() * &centered) / n as f64;
        let eig = SymmetricEigen::new(cov);
        let mut order: Vec<usize> = (0..g).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
        let eigenvalues = order.iter().map(|&i| eig.eigenvalues[i].max(0.0)).collect();
        let components = order[..k]
            .iter()
            .map(|&i| {
                let mut v: Vec<f64> = eig.eigenvectors.column(i).iter().copied().collect();
                if v.iter().sum::<f64>() < 0.0 {
                    v.iter_mut().for_each(|x| *x = -*x);
                }
                v
            })
            .collect();
        Ok(Self {
            mean,
            components,
            eigenvalues,
        })
    }

    pub fn scores(&self, values: &[f64]) -> Result<Vec<f64>> {
        if values.len() != self.mean.len() {
            return Err(Error::DimensionMismatch {
                expected: self.mean.len(),
                found: values.len(),
            });
        }
        Ok(self
            .components
            .iter()
            .map(|phi| {
                phi.iter()
                    .zip(values.iter().zip(&self.mean))
                    .map(|(p, (x, m))| p * (x - m))
                    .sum()
            })
            .collect())
    }

    /// Share of total variance carried by the first `k` eigenvalues.
    pub fn explained(&self, k: usize) -> f64 {
        let total: f64 = self.eigenvalues.iter().sum();
        if total == 0.0 {
            return 0.0;
        }
        self.eigenvalues.iter().take(k).sum::<f64>() / total
    }
}
