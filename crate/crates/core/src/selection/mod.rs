//! Truncation-order selection, penalty calibration and lasso weight tuning.

mod cv;
mod lambda;
mod order;
mod penalty;
mod slope;

pub use cv::{fold_indices, stratified_folds};
pub use lambda::{
    cross_validate_lambda, default_lambda_grid, tune_lambda, tune_lambda_search, tune_lambda_search_at, FoldData, LambdaSearch,
    TUNING_ORDER,
};
pub use order::{
    auto_stop_order, select_from_risks, select_order, select_order_auto, CriterionRow, OrderFit, OrderRecord,
    OrderSelectionTrace, RiskProfile,
};
pub use penalty::{penalty, PenaltySpec, DEFAULT_RHO};
pub use slope::{
    calibration_p_max, default_cpen_grid, first_sharp_drop, first_sharp_drop_measured, log_grid, DropMeasure, slope_heuristic,
    slope_heuristic_from_profile, SlopeHeuristic, CALIBRATION_MAX_FEATURES,
};
