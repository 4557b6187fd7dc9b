//! Class-conditional mean curves of the eight simulated channels.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Ramp that is 0 up to `a` and rises linearly to 1 at `t = 1`.
pub fn ramp(t: f64, a: f64) -> f64 {
    if t <= a {
        0.0
    } else {
        (t - a) / (1.0 - a)
    }
}

/// Normal density with the given mean and variance.
pub fn normal_pdf(x: f64, mean: f64, variance: f64) -> f64 {
    let z = x - mean;
    (-(z * z) / (2.0 * variance)).exp() / (2.0 * PI * variance).sqrt()
}

fn factorial(k: u32) -> f64 {
    (1..=k).map(f64::from).product()
}

/// Beta density for integer shape parameters.
pub fn beta_pdf(x: f64, a: u32, b: u32) -> f64 {
    if !(0.0..=1.0).contains(&x) {
        return 0.0;
    }
    let inv_beta = factorial(a + b - 1) / (factorial(a - 1) * factorial(b - 1));
    inv_beta * x.powi(a as i32 - 1) * (1.0 - x).powi(b as i32 - 1)
}

fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Mean curve `f_j(t)` of channel `j` (1-based) for a class label.
pub fn base_function(j: usize, label: u8, t: f64) -> Result<f64> {
    if label > 1 {
        return Err(Error::NonBinaryLabel(label));
    }
    let positive = label == 1;
    let v = match (j, positive) {
        (1, false) => (2.0 * PI * t).cos().exp() / 3.0,
        (1, true) => (2.0 * PI * t.powf(1.05)).cos().exp() / 3.0,
        (2, false) => 1.6 * t.cbrt(),
        (2, true) => 3f64.sqrt() * t.sqrt(),
        (3, false) => (0.5 + (PI * t.powi(4) / 2.0).cos()).ln(),
        (3, true) => 0.9 * (0.5 + (PI * t.powi(3) / 2.0).cos()).ln(),
        (4, false) => (2.0 * PI * t).sin().exp() / 3.0,
        (4, true) => (2.0 * PI * t.powf(1.05)).sin().exp() / 3.0,
        (5, false) => 0.6 * normal_pdf(t, 0.0, 1.0) + 0.4 * beta_pdf(t, 2, 3),
        // N(0.5, 0.5) read as variance 0.5
        (5, true) => 0.3 * normal_pdf(t, 0.5, 0.5) + 0.3 * beta_pdf(t, 3, 4),
        (6, false) => t.powi(4) - ramp(t, 0.55),
        (6, true) => t.powi(5) - ramp(t, 0.45),
        (7, false) => 0.2 * t - 0.2 * t * t + 0.98,
        (7, true) => -0.2 * t + 0.2 * t * t + 1.02,
        (8, false) => logistic(20.0 * t - 10.0) / 3.0 + 1.5,
        (8, true) => (12.0 * t - 6.3).tanh() / 3.0 + 1.5,
        _ => {
            return Err(Error::invalid(format!(
                "channel index {j} outside 1..=8"
            )))
        }
    };
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_values() {
        assert!((base_function(7, 0, 0.0).unwrap() - 0.98).abs() < 1e-15);
        assert!((base_function(2, 0, 1.0).unwrap() - 1.6).abs() < 1e-15);
        assert!((base_function(6, 0, 0.5).unwrap() - 0.0625).abs() < 1e-15);
        assert!((base_function(2, 1, 1.0).unwrap() - 3f64.sqrt()).abs() < 1e-15);
        assert!((base_function(8, 0, 0.5).unwrap() - (0.5 / 3.0 + 1.5)).abs() < 1e-15);
        assert!((base_function(1, 0, 0.0).unwrap() - 1f64.exp() / 3.0).abs() < 1e-15);
    }

    #[test]
    fn out_of_range() {
        assert!(base_function(0, 0, 0.5).is_err());
        assert!(base_function(9, 1, 0.5).is_err());
        assert!(base_function(1, 2, 0.5).is_err());
    }

    #[test]
    fn densities_integrate_to_one() {
        let m = 20_000;
        let h = 1.0 / m as f64;
        let beta: f64 = (0..m).map(|k| beta_pdf((k as f64 + 0.5) * h, 3, 4)).sum::<f64>() * h;
        assert!((beta - 1.0).abs() < 1e-6);
        let h = 20.0 / m as f64;
        let normal: f64 = (0..m)
            .map(|k| normal_pdf(-10.0 + (k as f64 + 0.5) * h, 0.5, 0.5))
            .sum::<f64>()
            * h;
        assert!((normal - 1.0).abs() < 1e-6);
    }

    #[test]
    fn ramp_shape() {
        assert_eq!(ramp(0.3, 0.55), 0.0);
        assert_eq!(ramp(0.55, 0.55), 0.0);
        assert!((ramp(1.0, 0.55) - 1.0).abs() < 1e-15);
    }
}
