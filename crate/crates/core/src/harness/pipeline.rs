//! Training of one model variant on one training set: tune `λ`, calibrate
//! `C_pen`, select the order, keep the final fit.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::data::Dataset;
use super::model::{FeatureMap, FittedModel, ModelKind};
use crate::baselines::{fit_baseline, BasisKind};
use crate::error::{Error, Result, StageContext};
use crate::features::SignatureDesign;
use crate::linear_model::{fit_lasso_logistic, StandardizationStats};
use crate::selection::{
    auto_stop_order, calibration_p_max, default_cpen_grid, default_lambda_grid, slope_heuristic_from_profile,
    tune_lambda_search_at, DropMeasure, LambdaSearch, OrderSelectionTrace, PenaltySpec, RiskProfile, SlopeHeuristic,
    CALIBRATION_MAX_FEATURES, DEFAULT_RHO, TUNING_ORDER,
};

/// A hyperparameter that is either searched for or given.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Setting<T> {
    Auto,
    Fixed(T),
}

impl<T: Copy> Setting<T> {
    pub fn fixed(self) -> Option<T> {
        match self {
            Setting::Auto => None,
            Setting::Fixed(v) => Some(v),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineSettings {
    pub lambda: Setting<f64>,
    pub c_pen: Setting<f64>,
    pub p_max: Setting<usize>,
    pub rho: f64,
    pub folds: usize,
    pub lambda_grid: Vec<f64>,
    pub cpen_grid: Vec<f64>,
    pub cpen_drop: DropMeasure,
    /// Basis sizes for the baselines; each kind's default grid when `None`.
    pub k_grid: Option<Vec<usize>>,
    pub seed: u64,
}

impl Default for PipelineSettings {
    fn default() -> Self {
        Self {
            lambda: Setting::Auto,
            c_pen: Setting::Auto,
            p_max: Setting::Auto,
            rho: DEFAULT_RHO,
            folds: 5,
            lambda_grid: default_lambda_grid(),
            cpen_grid: default_cpen_grid(),
            cpen_drop: DropMeasure::default(),
            k_grid: None,
            seed: 0,
        }
    }
}

/// Final model plus the search records that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFit {
    pub model: FittedModel,
    pub lambda_search: Option<LambdaSearch>,
    pub slope: Option<SlopeHeuristic>,
    pub trace: Option<OrderSelectionTrace>,
    /// `(stage, seconds)` in execution order.
    pub timings: Vec<(String, f64)>,
}

struct Clock(Vec<(String, f64)>, Instant);

impl Clock {
    fn new() -> Self {
        Clock(Vec::new(), Instant::now())
    }

    fn lap(&mut self, stage: &str) {
        let now = Instant::now();
        self.0.push((stage.to_owned(), (now - self.1).as_secs_f64()));
        self.1 = now;
    }
}

fn lambda_for(kind: ModelKind, data: &Dataset, s: &PipelineSettings) -> Result<(f64, Option<LambdaSearch>)> {
    if let Some(l) = s.lambda.fixed() {
        return Ok((l, None));
    }
    let search = match kind.basis() {
        Some(basis) => {
            let grid = k_grid(basis, s);
            let mid = grid[grid.len() / 2];
            crate::baselines::baseline_lambda_search(basis, mid, data, s.folds, &s.lambda_grid, s.seed)?
        }
        None => {
            let order = if kind == ModelKind::Scalar { 0 } else { TUNING_ORDER };
            tune_lambda_search_at(data, order, s.folds, &s.lambda_grid, s.seed)?
        }
    };
    Ok((search.lambda, Some(search)))
}

fn k_grid(basis: BasisKind, s: &PipelineSettings) -> Vec<usize> {
    s.k_grid.clone().unwrap_or_else(|| basis.default_k_grid())
}

/// Trains `kind` on `train` only.
pub fn fit_model(kind: ModelKind, train: &Dataset, settings: &PipelineSettings) -> Result<ModelFit> {
    train.require_both_classes("training set")?;
    let mut clock = Clock::new();
    let data = if kind.uses_scalars() {
        train.clone()
    } else {
        train.without_scalars()
    };
    let (lambda, lambda_search) = lambda_for(kind, &data, settings).stage("tune-lambda")?;
    clock.lap("tune-lambda");

    if let Some(basis) = kind.basis() {
        let fit = fit_baseline(basis, &data, &k_grid(basis, settings), settings.folds, lambda, settings.seed)
            .stage("fit-baseline")?;
        clock.lap("fit-baseline");
        let model = FittedModel {
            kind,
            feature_map: FeatureMap::Basis { transform: fit.transform },
            standardization: fit.standardization,
            coefficients: fit.coefficients,
            lambda,
            c_pen: None,
            p_hat: None,
            channels: data.channels(),
            scalar_names: data.meta().scalar_names.clone(),
        };
        return Ok(ModelFit {
            model,
            lambda_search,
            slope: None,
            trace: None,
            timings: clock.0,
        });
    }

    let design = SignatureDesign::new(&data).stage("features")?;
    let base_spec = |c_pen: f64| PenaltySpec::new(c_pen, settings.rho, data.q(), data.len(), data.alphabet());

    let (profile, c_pen, slope) = if kind == ModelKind::Scalar {
        let profile = RiskProfile::compute(&design, lambda, 0).stage("select-order")?;
        (profile, settings.c_pen.fixed(), None)
    } else {
        let (profile, c_pen, slope) = match settings.c_pen {
            Setting::Fixed(c) => {
                let spec = base_spec(c).stage("select-order")?;
                let profile = match settings.p_max {
                    Setting::Fixed(p) => RiskProfile::compute(&design, lambda, p),
                    Setting::Auto => RiskProfile::compute_auto(&design, lambda, &spec),
                }
                .stage("select-order")?;
                (profile, c, None)
            }
            Setting::Auto => {
                let cap = settings
                    .p_max
                    .fixed()
                    .unwrap_or_else(|| calibration_p_max(data.alphabet(), CALIBRATION_MAX_FEATURES));
                let profile = RiskProfile::compute(&design, lambda, cap).stage("calibrate-cpen")?;
                let slope = slope_heuristic_from_profile(&profile, &settings.cpen_grid, settings.rho, settings.cpen_drop)
                    .stage("calibrate-cpen")?;
                clock.lap("calibrate-cpen");
                let spec = base_spec(slope.c_pen).stage("select-order")?;
                let profile = match settings.p_max {
                    Setting::Fixed(_) => profile,
                    Setting::Auto => match auto_stop_order(&profile.risks(), &spec)? {
                        Some(p) => profile.truncated(p)?,
                        None => profile,
                    },
                };
                (profile, slope.c_pen, Some(slope))
            }
        };
        (profile, Some(c_pen), slope)
    };
    let spec = base_spec(c_pen.unwrap_or(0.0)).stage("select-order")?;
    let trace = profile.select(&spec).stage("select-order")?;
    clock.lap("select-order");
    let p_hat = trace.selected_p;
    let fit = profile
        .fit(p_hat)
        .ok_or_else(|| Error::invalid("selected order missing from the profile"))?;
    let model = FittedModel {
        kind,
        feature_map: FeatureMap::Signature {
            order: p_hat,
            use_scalars: kind.uses_scalars(),
        },
        standardization: profile.standardization(p_hat)?,
        coefficients: fit.coefficients.clone(),
        lambda,
        c_pen,
        p_hat: Some(p_hat),
        channels: data.channels(),
        scalar_names: data.meta().scalar_names.clone(),
    };
    Ok(ModelFit {
        model,
        lambda_search,
        slope,
        trace: Some(trace),
        timings: clock.0,
    })
}

/// Fits a signature model at a given order and weight, with no selection.
pub fn fit_at_order(train: &Dataset, order: usize, lambda: f64, use_scalars: bool) -> Result<FittedModel> {
    train.require_both_classes("training set")?;
    let data = if use_scalars {
        train.clone()
    } else {
        train.without_scalars()
    };
    let design = SignatureDesign::new(&data)?;
    let x = design.design(order)?;
    let stats = StandardizationStats::fit(&x)?;
    let z = stats.transform(&x)?;
    let sig_len = crate::sigcore::sig_dim(data.alphabet(), order)?;
    let coefficients = fit_lasso_logistic(&z, &data.labels(), lambda, sig_len)?;
    Ok(FittedModel {
        kind: if use_scalars {
            ModelKind::Pslr
        } else {
            ModelKind::Signature
        },
        feature_map: FeatureMap::Signature { order, use_scalars },
        standardization: stats,
        coefficients,
        lambda,
        c_pen: None,
        p_hat: Some(order),
        channels: data.channels(),
        scalar_names: data.meta().scalar_names.clone(),
    })
}
