//! L1-penalized logistic regression by cyclic coordinate descent.
//!
//! Minimizes `R(θ) + λ‖θ‖₁` where `R` is the average logistic loss. Each
//! coordinate update minimizes a quadratic model of `R` along that coordinate
//! plus the L1 term, which is solved exactly by soft-thresholding. The model
//! first uses the exact curvature at the current point; if that step fails to
//! lower the objective, the update falls back to the global majorizer with
//! curvature `Σ x_ij² / 4n`, which always does. Every accepted step is
//! therefore non-increasing in the objective.
//!
//! Every sweep over all coordinates is followed by a proximal Newton step on
//! the non-zero ones: the weighted quadratic model of `R` on that block plus
//! the L1 term is minimized by the same soft-thresholded coordinate updates,
//! and the resulting direction is backtracked until the true objective drops
//! enough. Collinear blocks, where single-coordinate moves crawl, are handled
//! by this step. The solver stops once a full sweep moves no
//! coordinate by more than `step_tolerance` and the optimality conditions hold
//! to half of `kkt_tolerance`, or after `max_passes` sweeps. Running out of
//! sweeps is an error unless the KKT conditions are met anyway.

use nalgebra::DMatrix;

use super::logistic::{check_labels, kkt_violation, logistic_loss, scores, sigmoid, Coefficients};
use crate::error::{Error, Result};

const NEWTON_INNER_PASSES: usize = 500;
const NEWTON_INNER_TOLERANCE: f64 = 1e-10;
const NEWTON_MAX_HALVINGS: usize = 40;
const ARMIJO: f64 = 1e-4;

#[derive(Debug, Clone)]
pub struct LassoOptions {
    pub step_tolerance: f64,
    pub kkt_tolerance: f64,
    pub max_passes: usize,
    /// Record the penalized objective after every sweep.
    pub record_objective: bool,
}

impl Default for LassoOptions {
    fn default() -> Self {
        Self {
            step_tolerance: 1e-8,
            kkt_tolerance: 1e-6,
            max_passes: 10_000,
            record_objective: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LassoFit {
    pub coefficients: Coefficients,
    pub passes: usize,
    pub kkt_violation: f64,
    /// Penalized objective at the start and after every sweep, when recorded.
    pub objective_trace: Vec<f64>,
}

/// Penalized objective `R(θ) + λ‖θ‖₁`.
pub fn lasso_objective(theta: &[f64], features: &DMatrix<f64>, labels: &[u8], lambda: f64) -> Result<f64> {
    let risk = super::logistic::empirical_risk(theta, features, labels)?;
    Ok(risk + lambda * theta.iter().map(|t| t.abs()).sum::<f64>())
}

#[inline]
fn soft_threshold(z: f64, gamma: f64) -> f64 {
    if z > gamma {
        z - gamma
    } else if z < -gamma {
        z + gamma
    } else {
        0.0
    }
}

/// Fit at `lambda` from a zero start. `signature_len` only labels the blocks
/// of the returned coefficients.
pub fn fit_lasso_logistic(
    features: &DMatrix<f64>,
    labels: &[u8],
    lambda: f64,
    signature_len: usize,
) -> Result<Coefficients> {
    Ok(fit_lasso_logistic_with(features, labels, lambda, signature_len, None, &LassoOptions::default())?.coefficients)
}

/// Fit at `lambda`, optionally warm-started from `init`.
pub fn fit_lasso_logistic_with(
    features: &DMatrix<f64>,
    labels: &[u8],
    lambda: f64,
    signature_len: usize,
    init: Option<&[f64]>,
    options: &LassoOptions,
) -> Result<LassoFit> {
    let (n, m) = features.shape();
    if n == 0 {
        return Err(Error::invalid("cannot fit on an empty sample"));
    }
    if labels.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: labels.len(),
        });
    }
    check_labels(labels)?;
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(Error::invalid(format!("lambda must be finite and >= 0, got {lambda}")));
    }
    if features.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("features contain non-finite entries"));
    }
    if signature_len > m {
        return Err(Error::invalid("signature block longer than the design"));
    }

    let mut theta = match init {
        Some(t) if t.len() == m => t.to_vec(),
        Some(t) => {
            return Err(Error::DimensionMismatch {
                expected: m,
                found: t.len(),
            })
        }
        None => vec![0.0; m],
    };
    let mut solver = Solver::new(features, labels, lambda, &theta);
    let mut trace = Vec::new();
    if options.record_objective {
        trace.push(solver.objective(&theta));
    }

    let all: Vec<usize> = (0..m).collect();
    let mut passes = 0;
    let target = 0.5 * options.kkt_tolerance;
    let mut violation = f64::INFINITY;
    while passes < options.max_passes {
        let full_change = solver.sweep(&mut theta, &all);
        passes += 1;
        if options.record_objective {
            trace.push(solver.objective(&theta));
        }
        if full_change <= options.step_tolerance {
            violation = kkt_violation(&theta, features, labels, lambda)?;
            if violation <= target {
                break;
            }
            // resynchronise scores to shed accumulated rounding
            solver.reset_scores(&theta);
        }
        let active: Vec<usize> = (0..m).filter(|&j| theta[j] != 0.0).collect();
        if !active.is_empty() && solver.newton_step(&mut theta, &active) && options.record_objective {
            trace.push(solver.objective(&theta));
        }
    }
    if !violation.is_finite() || passes >= options.max_passes {
        violation = kkt_violation(&theta, features, labels, lambda)?;
    }
    if violation > options.kkt_tolerance {
        return Err(Error::NotConverged { passes, violation });
    }
    Ok(LassoFit {
        coefficients: Coefficients::new(theta, signature_len)?,
        passes,
        kkt_violation: violation,
        objective_trace: trace,
    })
}

struct Solver<'a> {
    x: &'a DMatrix<f64>,
    y: Vec<f64>,
    labels: &'a [u8],
    lambda: f64,
    scores: Vec<f64>,
    /// `Σ_i x_ij² / 4n`, the global curvature bound of coordinate j.
    bound: Vec<f64>,
    inv_n: f64,
}

impl<'a> Solver<'a> {
    fn new(x: &'a DMatrix<f64>, labels: &'a [u8], lambda: f64, theta: &[f64]) -> Self {
        let inv_n = 1.0 / x.nrows() as f64;
        let bound = x
            .column_iter()
            .map(|c| 0.25 * inv_n * c.iter().map(|v| v * v).sum::<f64>())
            .collect();
        Self {
            x,
            y: labels.iter().map(|&y| f64::from(y)).collect(),
            labels,
            lambda,
            scores: scores(theta, x),
            bound,
            inv_n,
        }
    }

    fn reset_scores(&mut self, theta: &[f64]) {
        self.scores = scores(theta, self.x);
    }

    fn objective(&self, theta: &[f64]) -> f64 {
        let risk: f64 = self
            .scores
            .iter()
            .zip(self.labels)
            .map(|(&s, &y)| logistic_loss(s, y))
            .sum::<f64>()
            * self.inv_n;
        risk + self.lambda * theta.iter().map(|t| t.abs()).sum::<f64>()
    }

    /// One cyclic pass over `coords`; returns the largest coordinate move.
    fn sweep(&mut self, theta: &mut [f64], coords: &[usize]) -> f64 {
        let mut max_change: f64 = 0.0;
        for &j in coords {
            let delta = self.update(theta[j], j);
            if delta != 0.0 {
                theta[j] += delta;
                let col = self.x.column(j);
                for (s, &xv) in self.scores.iter_mut().zip(col.iter()) {
                    *s += delta * xv;
                }
                max_change = max_change.max(delta.abs());
            }
        }
        max_change
    }

    /// Proximal Newton step restricted to `active`. Returns whether a step
    /// was accepted; the objective never increases.
    fn newton_step(&mut self, theta: &mut [f64], active: &[usize]) -> bool {
        let n = self.x.nrows();
        let k = active.len();
        let probs: Vec<f64> = self.scores.iter().map(|&s| sigmoid(s)).collect();
        let mut weighted = DMatrix::zeros(n, k);
        let mut grad = vec![0.0; k];
        for (c, &j) in active.iter().enumerate() {
            let col = self.x.column(j);
            let mut g = 0.0;
            for i in 0..n {
                let p = probs[i];
                g += col[i] * (p - self.y[i]);
                weighted[(i, c)] = col[i] * (p * (1.0 - p)).sqrt();
            }
            grad[c] = g * self.inv_n;
        }
        let hess = weighted.tr_mul(&weighted) * self.inv_n;

        let lambda = self.lambda;
        let mut d = vec![0.0; k];
        let mut hd = vec![0.0; k];
        for _ in 0..NEWTON_INNER_PASSES {
            let mut max_change: f64 = 0.0;
            for c in 0..k {
                let h = hess[(c, c)];
                if h <= 0.0 {
                    continue;
                }
                let cur = theta[active[c]] + d[c];
                let delta = soft_threshold(cur - (grad[c] + hd[c]) / h, lambda / h) - cur;
                if delta != 0.0 {
                    d[c] += delta;
                    for (r, v) in hd.iter_mut().enumerate() {
                        *v += hess[(r, c)] * delta;
                    }
                    max_change = max_change.max(delta.abs() * h.sqrt());
                }
            }
            if max_change <= NEWTON_INNER_TOLERANCE {
                break;
            }
        }

        let l1 = |t: f64| -> f64 { active.iter().zip(&d).map(|(&j, dc)| (theta[j] + t * dc).abs()).sum() };
        let base_l1 = l1(0.0);
        let predicted = grad.iter().zip(&d).map(|(g, dc)| g * dc).sum::<f64>() + lambda * (l1(1.0) - base_l1);
        if !(predicted < 0.0) {
            return false;
        }
        let mut direction = vec![0.0; n];
        for (c, &j) in active.iter().enumerate() {
            if d[c] != 0.0 {
                for (u, &xv) in direction.iter_mut().zip(self.x.column(j).iter()) {
                    *u += d[c] * xv;
                }
            }
        }
        let risk_at = |t: f64| -> f64 {
            self.scores
                .iter()
                .zip(&direction)
                .zip(self.labels)
                .map(|((&s, &u), &y)| logistic_loss(s + t * u, y))
                .sum::<f64>()
                * self.inv_n
        };
        let start = risk_at(0.0) + lambda * base_l1;
        let mut t = 1.0;
        for _ in 0..NEWTON_MAX_HALVINGS {
            let value = risk_at(t) + lambda * l1(t);
            if value <= start + ARMIJO * t * predicted {
                for (c, &j) in active.iter().enumerate() {
                    theta[j] += t * d[c];
                }
                for (s, u) in self.scores.iter_mut().zip(&direction) {
                    *s += t * u;
                }
                return true;
            }
            t *= 0.5;
        }
        false
    }

    /// Step for coordinate `j` currently at `current`.
    fn update(&self, current: f64, j: usize) -> f64 {
        let bound = self.bound[j];
        if bound == 0.0 {
            // all-zero column: only the penalty acts on it
            return -current;
        }
        let col = self.x.column(j);
        let mut grad = 0.0;
        let mut curv = 0.0;
        for ((&x, &s), &y) in col.iter().zip(&self.scores).zip(&self.y) {
            let p = sigmoid(s);
            grad += x * (p - y);
            curv += x * x * p * (1.0 - p);
        }
        grad *= self.inv_n;
        curv *= self.inv_n;

        let lambda = self.lambda;
        let mm_step = soft_threshold(current - grad / bound, lambda / bound) - current;
        if curv <= bound * 1e-12 || curv >= bound {
            return mm_step;
        }
        let newton_step = soft_threshold(current - grad / curv, lambda / curv) - current;
        if newton_step == 0.0 || newton_step == mm_step {
            return newton_step;
        }
        // accept the curvature step only if it lowers the exact 1-D objective
        let mut change = 0.0;
        for ((&x, &s), &y) in col.iter().zip(&self.scores).zip(&self.y) {
            let moved = s + newton_step * x;
            change += softplus_diff(s, moved) - y * newton_step * x;
        }
        change *= self.inv_n;
        change += lambda * ((current + newton_step).abs() - current.abs());
        if change <= 0.0 {
            newton_step
        } else {
            mm_step
        }
    }
}

/// `softplus(b) - softplus(a)`.
#[inline]
fn softplus_diff(a: f64, b: f64) -> f64 {
    super::logistic::softplus(b) - super::logistic::softplus(a)
}
