//! Classical functional classifiers: B-spline or Fourier coefficients and
//! per-channel FPCA scores, with scalars appended, fed to the same lasso.

mod basis;
mod fpca;
mod model;

pub use basis::{
    bspline_basis, bspline_features, common_grid, fourier_basis, fourier_features, projector, resample,
    COMMON_GRID_SIZE,
};
pub use fpca::FpcaChannel;
pub use model::{baseline_cv_risk, baseline_lambda_search, fit_baseline, BaselineFit, BasisKind, BasisTransform};
