//! Empirical risk profile over truncation orders and the penalized choice of
//! order.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::penalty::{penalty, PenaltySpec};
use crate::error::{Error, Result};
use crate::features::SignatureDesign;
use crate::harness::Dataset;
use crate::linear_model::{
    empirical_risk, fit_lasso_logistic_with, standardize_fit, Coefficients, LassoOptions,
    StandardizationStats,
};
use crate::sigcore::{sig_dim, GradedSignature};

/// Lasso fit on the standardized order-`p` design.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderFit {
    pub p: usize,
    /// Unpenalized logistic risk at the lasso solution.
    pub empirical_risk: f64,
    pub coefficients: Coefficients,
    pub kkt_violation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskProfile {
    fits: Vec<OrderFit>,
    standardization: StandardizationStats,
    lambda: f64,
    alphabet: usize,
    q: usize,
    n: usize,
}

struct Grower<'a> {
    design: &'a SignatureDesign,
    lambda: f64,
    options: LassoOptions,
    signatures: Vec<GradedSignature>,
    signature_order: Option<usize>,
    fits: Vec<OrderFit>,
    standardization: Option<StandardizationStats>,
}

impl<'a> Grower<'a> {
    fn new(design: &'a SignatureDesign, lambda: f64) -> Result<Self> {
        if design.is_empty() {
            return Err(Error::invalid("cannot select an order on an empty sample"));
        }
        let labels = design.labels();
        if !labels.contains(&0) || !labels.contains(&1) {
            return Err(Error::SingleClass("order selection needs both classes".into()));
        }
        if !(lambda >= 0.0) || !lambda.is_finite() {
            return Err(Error::invalid(format!("lambda must be finite and >= 0, got {lambda}")));
        }
        Ok(Self {
            design,
            lambda,
            options: LassoOptions::default(),
            signatures: Vec::new(),
            signature_order: None,
            fits: Vec::new(),
            standardization: None,
        })
    }

    fn ensure_signatures(&mut self, order: usize) -> Result<()> {
        if self.signature_order.is_none_or(|o| o < order) {
            self.signatures = self.design.signatures(order)?;
            self.signature_order = Some(order);
        }
        Ok(())
    }

    fn matrix(&self, p: usize) -> Result<DMatrix<f64>> {
        self.design.assemble(&self.signatures, p)
    }

    /// Warm start from the previous order: old signature coordinates keep
    /// their values, the new level starts at zero.
    fn warm_start(&self, sig_len: usize) -> Option<Vec<f64>> {
        let prev = self.fits.last()?;
        let old = prev.coefficients.signature_block();
        let mut init = vec![0.0; sig_len];
        init[..old.len()].copy_from_slice(old);
        init.extend_from_slice(prev.coefficients.scalar_block());
        Some(init)
    }

    fn push_next(&mut self) -> Result<()> {
        let p = self.fits.len();
        self.ensure_signatures(p)?;
        let x = self.matrix(p)?;
        let (stats, z) = standardize_fit(&x)?;
        let sig_len = sig_dim(self.design.alphabet(), p)?;
        let init = self.warm_start(sig_len);
        let labels = self.design.labels();
        let fit = fit_lasso_logistic_with(&z, labels, self.lambda, sig_len, init.as_deref(), &self.options)
            .map_err(|e| Error::invalid(format!("lasso at order {p}: {e}")))?;
        let risk = empirical_risk(fit.coefficients.as_slice(), &z, labels)?;
        self.fits.push(OrderFit {
            p,
            empirical_risk: risk,
            coefficients: fit.coefficients,
            kkt_violation: fit.kkt_violation,
        });
        self.standardization = Some(stats);
        Ok(())
    }

    fn finish(self) -> RiskProfile {
        RiskProfile {
            standardization: self.standardization.unwrap_or_default(),
            lambda: self.lambda,
            alphabet: self.design.alphabet(),
            q: self.design.q(),
            n: self.design.len(),
            fits: self.fits,
        }
    }
}

impl RiskProfile {
    /// Fits at every order `0..=p_max`.
    pub fn compute(design: &SignatureDesign, lambda: f64, p_max: usize) -> Result<Self> {
        let needed = sig_dim(design.alphabet(), p_max)?;
        if needed > design.budget() {
            return Err(Error::BudgetExceeded {
                alphabet: design.alphabet(),
                order: p_max,
                required: needed,
                budget: design.budget(),
            });
        }
        let mut grower = Grower::new(design, lambda)?;
        grower.ensure_signatures(p_max)?;
        for _ in 0..=p_max {
            grower.push_next()?;
        }
        Ok(grower.finish())
    }

    /// Grows the profile until the criterion under `spec` has risen at two
    /// consecutive orders, or the next order would exceed the feature budget.
    pub fn compute_auto(design: &SignatureDesign, lambda: f64, spec: &PenaltySpec) -> Result<Self> {
        let mut grower = Grower::new(design, lambda)?;
        let mut risks: Vec<f64> = Vec::new();
        loop {
            let p = grower.fits.len();
            grower.push_next()?;
            risks.push(grower.fits[p].empirical_risk);
            if auto_stop_order(&risks, spec)?.is_some() {
                break;
            }
            match sig_dim(design.alphabet(), p + 1) {
                Ok(next) if next <= design.budget() => {}
                _ => break,
            }
        }
        Ok(grower.finish())
    }

    /// The profile restricted to orders `0..=p`.
    pub fn truncated(&self, p: usize) -> Result<Self> {
        if p > self.p_max() {
            return Err(Error::invalid(format!("order {p} beyond the profile's {}", self.p_max())));
        }
        Ok(Self {
            fits: self.fits[..=p].to_vec(),
            standardization: self.standardization(p)?,
            ..self.clone()
        })
    }

    pub fn fits(&self) -> &[OrderFit] {
        &self.fits
    }

    pub fn fit(&self, p: usize) -> Option<&OrderFit> {
        self.fits.get(p)
    }

    pub fn p_max(&self) -> usize {
        self.fits.len() - 1
    }

    pub fn risks(&self) -> Vec<f64> {
        self.fits.iter().map(|f| f.empirical_risk).collect()
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn alphabet(&self) -> usize {
        self.alphabet
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Column statistics of the order-`p` design.
    pub fn standardization(&self, p: usize) -> Result<StandardizationStats> {
        let top = sig_dim(self.alphabet, self.p_max())?;
        let sig_len = sig_dim(self.alphabet, p)?;
        let columns: Vec<usize> = (0..sig_len).chain(top..top + self.q).collect();
        Ok(self.standardization.select(&columns))
    }

    pub fn select(&self, spec: &PenaltySpec) -> Result<OrderSelectionTrace> {
        if spec.alphabet != self.alphabet {
            return Err(Error::DimensionMismatch {
                expected: self.alphabet,
                found: spec.alphabet,
            });
        }
        let (rows, selected_p) = select_from_risks(&self.risks(), spec)?;
        let records = rows
            .into_iter()
            .zip(&self.fits)
            .map(|(row, fit)| OrderRecord {
                p: row.p,
                empirical_risk: row.empirical_risk,
                penalty: row.penalty,
                criterion: row.criterion,
                coefficients: fit.coefficients.clone(),
            })
            .collect();
        Ok(OrderSelectionTrace { records, selected_p })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriterionRow {
    pub p: usize,
    pub empirical_risk: f64,
    pub penalty: f64,
    pub criterion: f64,
}

/// Penalized criterion for risks indexed by order `0..`, and the smallest
/// order attaining its minimum.
pub fn select_from_risks(risks: &[f64], spec: &PenaltySpec) -> Result<(Vec<CriterionRow>, usize)> {
    if risks.is_empty() {
        return Err(Error::invalid("no orders to choose from"));
    }
    let mut rows = Vec::with_capacity(risks.len());
    let mut best = 0;
    for (p, &risk) in risks.iter().enumerate() {
        let pen = penalty(p, spec)?;
        let row = CriterionRow {
            p,
            empirical_risk: risk,
            penalty: pen,
            criterion: risk + pen,
        };
        if row.criterion < rows.get(best).map_or(f64::INFINITY, |r: &CriterionRow| r.criterion) {
            best = p;
        }
        rows.push(row);
    }
    Ok((rows, best))
}

/// First order at which the criterion has risen at two consecutive orders,
/// if the risks reach that far.
pub fn auto_stop_order(risks: &[f64], spec: &PenaltySpec) -> Result<Option<usize>> {
    let mut criteria = Vec::with_capacity(risks.len());
    for (p, r) in risks.iter().enumerate() {
        criteria.push(r + penalty(p, spec)?);
        if p >= 2 && criteria[p] > criteria[p - 1] && criteria[p - 1] > criteria[p - 2] {
            return Ok(Some(p));
        }
    }
    Ok(None)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderRecord {
    pub p: usize,
    pub empirical_risk: f64,
    pub penalty: f64,
    pub criterion: f64,
    pub coefficients: Coefficients,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderSelectionTrace {
    pub records: Vec<OrderRecord>,
    pub selected_p: usize,
}

impl OrderSelectionTrace {
    pub fn selected(&self) -> &OrderRecord {
        &self.records[self.selected_p]
    }
}

/// Fits orders `0..=p_max` on `train` and returns the penalized choice.
/// `spec.q` is used as given, so a penalty for a different `q` than the
/// dataset carries can be applied.
pub fn select_order(train: &Dataset, lambda: f64, spec: &PenaltySpec, p_max: usize) -> Result<OrderSelectionTrace> {
    train.require_both_classes("order selection")?;
    let design = SignatureDesign::new(train)?;
    RiskProfile::compute(&design, lambda, p_max)?.select(spec)
}

/// As [`select_order`] with the order range grown automatically.
pub fn select_order_auto(train: &Dataset, lambda: f64, spec: &PenaltySpec) -> Result<OrderSelectionTrace> {
    train.require_both_classes("order selection")?;
    let design = SignatureDesign::new(train)?;
    RiskProfile::compute_auto(&design, lambda, spec)?.select(spec)
}
