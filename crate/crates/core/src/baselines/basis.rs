//! Cubic B-spline and Fourier design matrices on a grid, and least-squares
//! projection onto them.

use std::f64::consts::PI;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::sigcore::ChannelSeries;
use crate::synth::uniform_grid;

pub const COMMON_GRID_SIZE: usize = 100;
const DEGREE: usize = 3;

/// Uniform grid every channel is resampled onto before basis fitting.
pub fn common_grid() -> Vec<f64> {
    uniform_grid(COMMON_GRID_SIZE)
}

/// Linear interpolation of a channel onto `grid` (constant outside its range).
pub fn resample(channel: &ChannelSeries, grid: &[f64]) -> Vec<f64> {
    grid.iter().map(|&t| channel.value_at(t)).collect()
}

fn open_uniform_knots(k: usize) -> Vec<f64> {
    let interior = k - DEGREE - 1;
    let mut knots = vec![0.0; DEGREE + 1];
    knots.extend((1..=interior).map(|j| j as f64 / (interior + 1) as f64));
    knots.extend([1.0; DEGREE + 1]);
    knots
}

/// Nonzero cubic basis values at `t` in knot span `span`.
fn span_basis(span: usize, t: f64, knots: &[f64]) -> [f64; DEGREE + 1] {
    let mut n = [0.0; DEGREE + 1];
    let mut left = [0.0; DEGREE + 1];
    let mut right = [0.0; DEGREE + 1];
    n[0] = 1.0;
    for j in 1..=DEGREE {
        left[j] = t - knots[span + 1 - j];
        right[j] = knots[span + j] - t;
        let mut saved = 0.0;
        for r in 0..j {
            let temp = n[r] / (right[r + 1] + left[j - r]);
            n[r] = saved + right[r + 1] * temp;
            saved = left[j - r] * temp;
        }
        n[j] = saved;
    }
    n
}

/// `grid.len() × k` matrix of cubic B-splines with open uniform knots on
/// `[0, 1]`.
pub fn bspline_basis(k: usize, grid: &[f64]) -> Result<DMatrix<f64>> {
    if k < DEGREE + 1 {
        return Err(Error::invalid(format!("cubic B-splines need k >= 4, got {k}")));
    }
    if k > grid.len() {
        return Err(Error::invalid(format!("k = {k} exceeds the {} grid points", grid.len())));
    }
    let knots = open_uniform_knots(k);
    let mut out = DMatrix::zeros(grid.len(), k);
    for (row, &t) in grid.iter().enumerate() {
        let t = t.clamp(0.0, 1.0);
        let mut span = DEGREE;
        while span < k - 1 && t >= knots[span + 1] {
            span += 1;
        }
        let vals = span_basis(span, t, &knots);
        for (r, v) in vals.iter().enumerate() {
            out[(row, span - DEGREE + r)] = *v;
        }
    }
    Ok(out)
}

/// `grid.len() × k` matrix with columns `1, sin 2πt, cos 2πt, sin 4πt, ...`.
pub fn fourier_basis(k: usize, grid: &[f64]) -> Result<DMatrix<f64>> {
    if k.is_multiple_of(2) {
        return Err(Error::invalid(format!("Fourier basis size must be odd, got {k}")));
    }
    if k > grid.len() {
        return Err(Error::invalid(format!("k = {k} exceeds the {} grid points", grid.len())));
    }
    Ok(DMatrix::from_fn(grid.len(), k, |row, col| {
        let t = grid[row];
        if col == 0 {
            return 1.0;
        }
        let freq = 2.0 * PI * col.div_ceil(2) as f64;
        if col % 2 == 1 {
            (freq * t).sin()
        } else {
            (freq * t).cos()
        }
    }))
}

/// `(BᵀB)⁻¹Bᵀ` for a full-column-rank basis matrix.
pub fn projector(basis: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let columns = basis.ncols();
    let svd = basis.clone().svd(true, true);
    let max = svd.singular_values.max();
    let rank = svd.singular_values.iter().filter(|&&s| s > 1e-10 * max).count();
    if rank < columns {
        return Err(Error::RankDeficient { rank, columns });
    }
    svd.pseudo_inverse(0.0).map_err(|e| Error::invalid(e.to_string()))
}

fn project(projector: &DMatrix<f64>, values: &[f64]) -> Vec<f64> {
    (0..projector.nrows())
        .map(|r| projector.row(r).iter().zip(values).map(|(a, b)| a * b).sum())
        .collect()
}

fn channel_features(basis: DMatrix<f64>, channels: &[ChannelSeries], grid: &[f64]) -> Result<Vec<f64>> {
    let p = projector(&basis)?;
    Ok(channels.iter().flat_map(|c| project(&p, &resample(c, grid))).collect())
}

/// Least-squares cubic B-spline coefficients of each channel on the common
/// grid, concatenated.
pub fn bspline_features(channels: &[ChannelSeries], k: usize) -> Result<Vec<f64>> {
    let grid = common_grid();
    channel_features(bspline_basis(k, &grid)?, channels, &grid)
}

/// Least-squares Fourier coefficients of each channel on the common grid.
pub fn fourier_features(channels: &[ChannelSeries], k: usize) -> Result<Vec<f64>> {
    let grid = common_grid();
    channel_features(fourier_basis(k, &grid)?, channels, &grid)
}

pub(crate) fn project_values(projector: &DMatrix<f64>, values: &[f64]) -> Vec<f64> {
    project(projector, values)
}
