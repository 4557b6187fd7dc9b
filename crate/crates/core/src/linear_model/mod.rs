//! L1-penalized logistic regression on concatenated signature and scalar features.

mod lasso;
mod logistic;
mod standardize;

pub use lasso::{fit_lasso_logistic, fit_lasso_logistic_with, lasso_objective, LassoFit, LassoOptions};
pub use logistic::{
    empirical_risk, kkt_violation, logistic_loss, predict_label, predict_proba,
    predict_proba_rows, risk_gradient, scores, sigmoid, softplus, Coefficients, FeatureVector,
};
pub use standardize::{standardize_fit, StandardizationStats};
