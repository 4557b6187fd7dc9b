//! Synthetic two-class functional data with scalar covariates.

mod functions;
mod gp;
mod scalars;
mod scenario;

pub use functions::{base_function, beta_pdf, normal_pdf, ramp};
pub use gp::{gp_noise, GpSampler};
pub use scalars::sample_scalar;
pub use scenario::{apply_missing, generate_dataset, uneven_grid, uniform_grid, ScenarioConfig, MAX_CHANNELS, MAX_SCALARS};
