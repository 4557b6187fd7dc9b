//! Synthetic datasets `D(d, q)` and the irregular-sampling perturbations.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::functions::base_function;
use super::gp::GpSampler;
use super::scalars::sample_scalar;
use crate::error::{Error, Result};
use crate::harness::{Dataset, DatasetMeta, Sample};
use crate::rng::{derive_seed, rng_from_seed, streams};
use crate::sigcore::ChannelSeries;

pub const MAX_CHANNELS: usize = 8;
pub const MAX_SCALARS: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub d: usize,
    pub q: usize,
    pub n: usize,
    pub grid_size: usize,
    pub noise_scale: f64,
    pub length_scale: f64,
    /// When set, each sample gets its own uneven grid with this spread.
    pub grid_sigma: Option<f64>,
    pub seed: u64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            d: 2,
            q: 1,
            n: 1000,
            grid_size: 100,
            noise_scale: 0.1,
            length_scale: 1.0,
            grid_sigma: None,
            seed: 0,
        }
    }
}

impl ScenarioConfig {
    pub fn new(d: usize, q: usize, n: usize, seed: u64) -> Self {
        Self {
            d,
            q,
            n,
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=MAX_CHANNELS).contains(&self.d) {
            return Err(Error::Config(format!("d must be in 1..={MAX_CHANNELS}, got {}", self.d)));
        }
        if self.q > MAX_SCALARS {
            return Err(Error::Config(format!("q must be in 0..={MAX_SCALARS}, got {}", self.q)));
        }
        if self.n == 0 {
            return Err(Error::Config("n must be at least 1".into()));
        }
        if self.grid_size < 2 {
            return Err(Error::Config("grid_size must be at least 2".into()));
        }
        if let Some(s) = self.grid_sigma {
            if !(s >= 0.0) || !s.is_finite() {
                return Err(Error::Config(format!("grid_sigma must be >= 0, got {s}")));
            }
        }
        Ok(())
    }
}

/// `k / (T - 1)` for `k = 0..T`.
pub fn uniform_grid(size: usize) -> Vec<f64> {
    let last = (size.max(2) - 1) as f64;
    (0..size).map(|k| k as f64 / last).collect()
}

fn uneven_grid_with<R: Rng + ?Sized>(size: usize, sigma: f64, rng: &mut R) -> Result<Vec<f64>> {
    if size < 2 {
        return Err(Error::invalid("an uneven grid needs at least 2 points"));
    }
    if sigma == 0.0 {
        return Ok(uniform_grid(size));
    }
    let normal = Normal::new(0.99, sigma).map_err(|e| Error::invalid(format!("grid spread: {e}")))?;
    let mut cum = Vec::with_capacity(size);
    cum.push(0.0);
    let mut acc = 0.0;
    for _ in 1..size {
        let step: f64 = 0.01 + normal.sample(rng).abs();
        acc += step;
        cum.push(acc);
    }
    let mut grid: Vec<f64> = cum.iter().map(|c| c / acc).collect();
    grid[size - 1] = 1.0;
    Ok(grid)
}

/// Random grid on `[0, 1]` built from normalized cumulative sums of
/// increments `0.01 + |N(0.99, σ²)|`.
pub fn uneven_grid(size: usize, sigma: f64, seed: u64) -> Result<Vec<f64>> {
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return Err(Error::invalid(format!("grid spread must be >= 0, got {sigma}")));
    }
    uneven_grid_with(size, sigma, &mut rng_from_seed(seed))
}

fn generate_sample(cfg: &ScenarioConfig, i: usize, shared: Option<(&[f64], &GpSampler)>) -> Result<Sample> {
    let label = (i % 2) as u8;
    let mut rng = rng_from_seed(derive_seed(cfg.seed, streams::SAMPLE, i as u64));
    let owned;
    let (grid, sampler) = match shared {
        Some((g, s)) => (g, s),
        None => {
            let sigma = cfg.grid_sigma.unwrap_or(0.0);
            let g = uneven_grid_with(cfg.grid_size, sigma, &mut rng)?;
            let s = GpSampler::new(&g, cfg.length_scale, cfg.noise_scale)?;
            owned = (g, s);
            (owned.0.as_slice(), &owned.1)
        }
    };
    let mut channels = Vec::with_capacity(cfg.d);
    for j in 0..cfg.d {
        let noise = sampler.sample(&mut rng);
        let values = grid
            .iter()
            .zip(&noise)
            .map(|(&t, e)| base_function(j + 1, label, t).map(|f| f + e))
            .collect::<Result<Vec<_>>>()?;
        channels.push(ChannelSeries::new(j, grid.to_vec(), values)?);
    }
    let scalars = (0..cfg.q)
        .map(|j| sample_scalar(j + 1, label, &mut rng))
        .collect::<Result<Vec<_>>>()?;
    Ok(Sample {
        id: format!("s{i:05}"),
        channels,
        scalars,
        label,
    })
}

/// `n` samples with alternating labels; channel `j` is `f_j` plus an
/// independent GP draw, scalar `j` is drawn from its class distribution.
pub fn generate_dataset(cfg: &ScenarioConfig) -> Result<Dataset> {
    cfg.validate()?;
    let shared = if cfg.grid_sigma.is_none() {
        let grid = uniform_grid(cfg.grid_size);
        let sampler = GpSampler::new(&grid, cfg.length_scale, cfg.noise_scale)?;
        Some((grid, sampler))
    } else {
        None
    };
    let samples = (0..cfg.n)
        .into_par_iter()
        .map(|i| generate_sample(cfg, i, shared.as_ref().map(|(g, s)| (g.as_slice(), s))))
        .collect::<Result<Vec<_>>>()?;
    let mut meta = DatasetMeta::new(cfg.d, cfg.q, format!("synthetic D({},{})", cfg.d, cfg.q));
    meta.seed = Some(cfg.seed);
    meta.notes.push(format!(
        "grid_size={} noise_scale={} length_scale={}",
        cfg.grid_size, cfg.noise_scale, cfg.length_scale
    ));
    if let Some(s) = cfg.grid_sigma {
        meta.notes.push(format!("uneven grid sigma_T={s}"));
    }
    if cfg.d >= 5 {
        meta.notes.push("f5 class 1 uses N(0.5, variance 0.5)".into());
    }
    if cfg.q >= 3 {
        meta.notes.push("exponential parameters are rates".into());
    }
    Dataset::new(samples, meta)
}

fn thin_channel(c: &ChannelSeries, prob: f64, seed: u64) -> Result<ChannelSeries> {
    let mut rng = rng_from_seed(seed);
    loop {
        let keep: Vec<bool> = (0..c.len()).map(|_| rng.random::<f64>() >= prob).collect();
        if keep.iter().filter(|&&k| k).count() >= 2 {
            let (times, values): (Vec<f64>, Vec<f64>) = c
                .times()
                .iter()
                .zip(c.values())
                .zip(&keep)
                .filter(|(_, &k)| k)
                .map(|((&t, &v), _)| (t, v))
                .unzip();
            return ChannelSeries::new(c.channel(), times, values);
        }
    }
}

/// Drops each observation independently with probability `prob`; a
/// channel's mask is redrawn until at least two points survive.
pub fn apply_missing(dataset: &Dataset, prob: f64, seed: u64) -> Result<Dataset> {
    if !(0.0..1.0).contains(&prob) {
        return Err(Error::invalid(format!("missing probability must be in [0, 1), got {prob}")));
    }
    if prob == 0.0 {
        return Ok(dataset.clone());
    }
    let mut out = dataset.map_samples(|i, s| {
        let sample_seed = derive_seed(seed, streams::MISSING, i as u64);
        let channels = s
            .channels
            .iter()
            .map(|c| thin_channel(c, prob, derive_seed(sample_seed, streams::MISSING, c.channel() as u64)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Sample {
            channels,
            ..s.clone()
        })
    })?;
    out.meta_mut().notes.push(format!("missing probability {prob}"));
    Ok(out)
}
