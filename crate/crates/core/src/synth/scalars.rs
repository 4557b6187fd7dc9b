//! Class-conditional distributions of the eight simulated scalar covariates.
//!
//! Exponential parameters are rates, Gamma is shape/scale, and the
//! chi-square draws use `Γ(k/2, 2)` so fractional degrees of freedom work.

use rand::Rng;
use rand_distr::{Bernoulli, Beta, Distribution, Exp, Gamma, LogNormal, Normal, Uniform};

use crate::error::{Error, Result};

fn dist_err(e: impl std::fmt::Display) -> Error {
    Error::invalid(format!("distribution parameters: {e}"))
}

/// One draw of covariate `j` (1-based) for the given class.
pub fn sample_scalar<R: Rng + ?Sized>(j: usize, label: u8, rng: &mut R) -> Result<f64> {
    if label > 1 {
        return Err(Error::NonBinaryLabel(label));
    }
    let pos = label == 1;
    let v = match j {
        1 => {
            let (lo, hi) = if pos { (0.75, 1.75) } else { (1.0, 2.0) };
            Uniform::new_inclusive(lo, hi).map_err(dist_err)?.sample(rng)
        }
        2 => Normal::new(if pos { 0.5 } else { 0.0 }, 1.0)
            .map_err(dist_err)?
            .sample(rng),
        3 => Exp::new(if pos { 1.0 } else { 0.5 })
            .map_err(dist_err)?
            .sample(rng),
        4 => {
            let dof: f64 = if pos { 0.2 } else { 0.1 };
            Gamma::new(dof / 2.0, 2.0).map_err(dist_err)?.sample(rng)
        }
        5 => LogNormal::new(if pos { 0.25 } else { 0.0 }, 1.0)
            .map_err(dist_err)?
            .sample(rng),
        6 => Gamma::new(if pos { 3.0 } else { 2.0 }, 2.0)
            .map_err(dist_err)?
            .sample(rng),
        7 => {
            let (a, b) = if pos { (3.0, 2.0) } else { (2.0, 3.0) };
            Beta::new(a, b).map_err(dist_err)?.sample(rng)
        }
        8 => {
            let p = if pos { 0.45 } else { 0.55 };
            f64::from(u8::from(Bernoulli::new(p).map_err(dist_err)?.sample(rng)))
        }
        _ => return Err(Error::invalid(format!("scalar index {j} outside 1..=8"))),
    };
    Ok(v)
}
