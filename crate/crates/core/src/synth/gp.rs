//! Draws from a zero-mean Gaussian process with exponential covariance
//! `σ² exp(-|s - t| / ℓ)`, via the Cholesky factor of the Gram matrix.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::rng::rng_from_seed;

const BASE_JITTER: f64 = 1e-10;
const MAX_JITTER: f64 = 1e-4;

/// Cached factor for repeated draws on one grid.
#[derive(Debug, Clone)]
pub struct GpSampler {
    factor: Option<DMatrix<f64>>,
    len: usize,
}

impl GpSampler {
    pub fn new(grid: &[f64], length_scale: f64, noise_scale: f64) -> Result<Self> {
        if !(length_scale > 0.0) {
            return Err(Error::invalid(format!("length scale must be > 0, got {length_scale}")));
        }
        if !(noise_scale >= 0.0) || !noise_scale.is_finite() {
            return Err(Error::invalid(format!("noise scale must be >= 0, got {noise_scale}")));
        }
        if grid.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::invalid("GP grid must be sorted"));
        }
        let len = grid.len();
        if noise_scale == 0.0 || len == 0 {
            return Ok(Self { factor: None, len });
        }
        let var = noise_scale * noise_scale;
        let gram = DMatrix::from_fn(len, len, |a, b| {
            var * (-(grid[a] - grid[b]).abs() / length_scale).exp()
        });
        let mut jitter = BASE_JITTER;
        loop {
            let mut k = gram.clone();
            for i in 0..len {
                k[(i, i)] += jitter;
            }
            if let Some(chol) = k.cholesky() {
                return Ok(Self {
                    factor: Some(chol.unpack()),
                    len,
                });
            }
            jitter *= 10.0;
            if jitter > MAX_JITTER * var.max(1.0) {
                return Err(Error::Cholesky { jitter });
            }
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        match &self.factor {
            None => vec![0.0; self.len],
            Some(l) => {
                let z = DVector::from_fn(self.len, |_, _| StandardNormal.sample(rng));
                (l * z).iter().copied().collect()
            }
        }
    }
}

/// One seeded draw on `grid`.
pub fn gp_noise(grid: &[f64], length_scale: f64, noise_scale: f64, seed: u64) -> Result<Vec<f64>> {
    let sampler = GpSampler::new(grid, length_scale, noise_scale)?;
    Ok(sampler.sample(&mut rng_from_seed(seed)))
}
