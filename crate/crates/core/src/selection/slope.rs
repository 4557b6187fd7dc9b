//! Calibration of `C_pen` from the jump of `p̂(C_pen)`.

use serde::{Deserialize, Serialize};

use super::order::{select_from_risks, RiskProfile};
use super::penalty::PenaltySpec;
use crate::error::{Error, Result};
use crate::features::SignatureDesign;
use crate::harness::Dataset;
use crate::sigcore::sig_dim;

/// Largest design width explored when the calibration order is automatic.
pub const CALIBRATION_MAX_FEATURES: usize = 2048;

/// `count` log-spaced values from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.ln(), hi.ln());
            (0..count)
                .map(|k| (a + (b - a) * k as f64 / (count - 1) as f64).exp())
                .collect()
        }
    }
}

/// 121 values, 20 per decade, over `[1e-4, 1e2]`.
pub fn default_cpen_grid() -> Vec<f64> {
    log_grid(1e-4, 1e2, 121)
}

/// Highest order whose signature has at most `max_features` coordinates.
pub fn calibration_p_max(alphabet: usize, max_features: usize) -> usize {
    let mut p = 0;
    while matches!(sig_dim(alphabet, p + 1), Ok(s) if s <= max_features) {
        p += 1;
    }
    p
}

/// How the size of a step of `p̂(C_pen)` is measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DropMeasure {
    /// The order `p̂` itself.
    #[default]
    Order,
    /// Number of signature coordinates, `s_d(p̂)`.
    Dimension,
}

impl DropMeasure {
    pub fn name(self) -> &'static str {
        match self {
            DropMeasure::Dimension => "dimension",
            DropMeasure::Order => "order",
        }
    }
}

impl std::fmt::Display for DropMeasure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for DropMeasure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dimension" => Ok(DropMeasure::Dimension),
            "order" => Ok(DropMeasure::Order),
            other => Err(Error::Config(format!("unknown drop measure `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlopeHeuristic {
    /// `(C_pen, p̂)` for every grid value.
    pub path: Vec<(f64, usize)>,
    pub drop_at: f64,
    pub c_pen: f64,
}

/// Grid value at which `p̂` falls by the largest single step in `p`, scanning
/// in increasing `C_pen`; ties go to the smallest such value.
pub fn first_sharp_drop(path: &[(f64, usize)]) -> Result<f64> {
    sharp_drop_by(path, |p| Ok(p as f64))
}

/// Like [`first_sharp_drop`], with steps measured by `measure` on an alphabet
/// of `alphabet` letters.
pub fn first_sharp_drop_measured(path: &[(f64, usize)], measure: DropMeasure, alphabet: usize) -> Result<f64> {
    match measure {
        DropMeasure::Order => first_sharp_drop(path),
        DropMeasure::Dimension => sharp_drop_by(path, |p| Ok(sig_dim(alphabet, p)? as f64)),
    }
}

fn sharp_drop_by(path: &[(f64, usize)], size: impl Fn(usize) -> Result<f64>) -> Result<f64> {
    if path.windows(2).any(|w| !(w[1].0 > w[0].0)) {
        return Err(Error::invalid("C_pen grid must be strictly increasing"));
    }
    if path.last().is_none_or(|&(_, p)| p != 0) {
        let min_order = path.iter().map(|&(_, p)| p).min().unwrap_or(0);
        return Err(Error::GridTooSmall { min_order });
    }
    let mut best: Option<(f64, f64)> = None;
    for w in path.windows(2) {
        if w[1].1 < w[0].1 {
            let drop = size(w[0].1)? - size(w[1].1)?;
            if best.is_none_or(|(b, _)| drop > b) {
                best = Some((drop, w[1].0));
            }
        }
    }
    best.map(|(_, c)| c)
        .ok_or_else(|| Error::invalid("p̂ never drops on the C_pen grid"))
}

/// Runs the heuristic on a fitted risk profile; only the penalty changes
/// between grid values.
pub fn slope_heuristic_from_profile(
    profile: &RiskProfile,
    grid: &[f64],
    rho: f64,
    measure: DropMeasure,
) -> Result<SlopeHeuristic> {
    if grid.is_empty() {
        return Err(Error::invalid("empty C_pen grid"));
    }
    let risks = profile.risks();
    let base = PenaltySpec::new(grid[0].max(0.0), rho, profile.q(), profile.n(), profile.alphabet())?;
    let path = grid
        .iter()
        .map(|&c| {
            let spec = base.with_c_pen(c);
            spec.validate()?;
            Ok((c, select_from_risks(&risks, &spec)?.1))
        })
        .collect::<Result<Vec<_>>>()?;
    let drop_at = first_sharp_drop_measured(&path, measure, profile.alphabet())?;
    Ok(SlopeHeuristic {
        path,
        drop_at,
        c_pen: 2.0 * drop_at,
    })
}

pub fn slope_heuristic(
    train: &Dataset,
    lambda: f64,
    grid: &[f64],
    rho: f64,
    p_max: usize,
    measure: DropMeasure,
) -> Result<SlopeHeuristic> {
    train.require_both_classes("C_pen calibration")?;
    let design = SignatureDesign::new(train)?;
    let profile = RiskProfile::compute(&design, lambda, p_max)?;
    slope_heuristic_from_profile(&profile, grid, rho, measure)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn worked_example() {
        let path = [(0.002, 4), (0.004, 4), (0.008, 1), (0.016, 1), (0.1, 0)];
        assert_eq!(first_sharp_drop(&path).unwrap(), 0.008);
    }

    #[test]
    fn single_drop_at_end() {
        let path = [(1.0, 2), (2.0, 2), (3.0, 0)];
        assert_eq!(2.0 * first_sharp_drop(&path).unwrap(), 6.0);
    }

    #[test]
    fn equal_drops_pick_first() {
        let path = [(1.0, 2), (2.0, 1), (3.0, 0)];
        assert_eq!(first_sharp_drop(&path).unwrap(), 2.0);
    }

    #[test]
    fn dimension_weighs_high_orders() {
        // one order lost at the top outweighs two lost at the bottom
        let path = [(1.0, 4), (2.0, 3), (3.0, 2), (4.0, 0)];
        assert_eq!(first_sharp_drop(&path).unwrap(), 4.0);
        assert_eq!(first_sharp_drop_measured(&path, DropMeasure::Dimension, 3).unwrap(), 2.0);
        let worked = [(0.002, 4), (0.004, 4), (0.008, 1), (0.016, 1), (0.1, 0)];
        assert_eq!(first_sharp_drop_measured(&worked, DropMeasure::Dimension, 3).unwrap(), 0.008);
        assert_eq!("order".parse::<DropMeasure>().unwrap(), DropMeasure::Order);
    }

    #[test]
    fn grid_too_small() {
        let path = [(1.0, 3), (2.0, 1)];
        assert!(matches!(first_sharp_drop(&path), Err(Error::GridTooSmall { min_order: 1 })));
        assert!(first_sharp_drop(&[(2.0, 0), (1.0, 0)]).is_err());
    }

    #[test]
    fn grids() {
        let g = default_cpen_grid();
        assert_eq!(g.len(), 121);
        assert!((g[0] - 1e-4).abs() < 1e-18 && (g[120] - 100.0).abs() < 1e-9);
        assert_eq!(calibration_p_max(3, 2048), 6);
        assert_eq!(calibration_p_max(1, 10), 9);
    }
}
