use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sigcore::sig_dim;

pub const DEFAULT_RHO: f64 = 0.4;

/// Constants of `pen_n(p, q) = C_pen √(s_d(p) e^q) / n^ρ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PenaltySpec {
    pub c_pen: f64,
    pub rho: f64,
    pub q: usize,
    pub n: usize,
    /// Alphabet size `d` of the time-augmented path.
    pub alphabet: usize,
}

impl PenaltySpec {
    pub fn new(c_pen: f64, rho: f64, q: usize, n: usize, alphabet: usize) -> Result<Self> {
        let spec = Self {
            c_pen,
            rho,
            q,
            n,
            alphabet,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c_pen >= 0.0) || !self.c_pen.is_finite() {
            return Err(Error::invalid(format!("C_pen must be finite and >= 0, got {}", self.c_pen)));
        }
        if !(self.rho > 0.0 && self.rho < 0.5) {
            return Err(Error::invalid(format!("rho must lie in (0, 0.5), got {}", self.rho)));
        }
        if self.n == 0 {
            return Err(Error::invalid("penalty needs n >= 1"));
        }
        if self.alphabet == 0 {
            return Err(Error::invalid("penalty needs an alphabet of size >= 1"));
        }
        Ok(())
    }

    pub fn with_c_pen(self, c_pen: f64) -> Self {
        Self { c_pen, ..self }
    }
}

pub fn penalty(p: usize, spec: &PenaltySpec) -> Result<f64> {
    spec.validate()?;
    let s = sig_dim(spec.alphabet, p)? as f64;
    Ok(spec.c_pen * (s * (spec.q as f64).exp()).sqrt() / (spec.n as f64).powf(spec.rho))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn worked_values() {
        let spec = PenaltySpec::new(0.016, 0.4, 3, 1000, 3).unwrap();
        let p1 = penalty(1, &spec).unwrap();
        assert!((p1 - 0.009049).abs() < 5e-7);
        let p0 = penalty(0, &spec).unwrap();
        assert!((p0 - 0.004524).abs() < 5e-7);
        for p in 0..8 {
            assert!(penalty(p + 1, &spec).unwrap() > penalty(p, &spec).unwrap());
        }
    }

    #[test]
    fn rejects_bad_rho() {
        assert!(PenaltySpec::new(1.0, 0.5, 0, 10, 2).is_err());
        assert!(PenaltySpec::new(1.0, 0.0, 0, 10, 2).is_err());
        assert!(PenaltySpec::new(-1.0, 0.4, 0, 10, 2).is_err());
    }

    #[test]
    fn overflow_propagates() {
        let spec = PenaltySpec::new(1.0, 0.4, 0, 10, 1000).unwrap();
        assert!(matches!(penalty(10, &spec), Err(Error::Overflow { .. })));
    }
}
