//! Datasets, file formats, splitting, metrics and experiment orchestration.

mod config;
mod data;
mod experiment;
mod gait;
mod io;
mod metrics;
mod model;
mod pipeline;
mod split;

pub use config::{load_config, parse_config, ExperimentConfig, Mode, SEED_ENV};
pub use data::{Dataset, DatasetMeta, Sample};
pub use experiment::{
    pipeline_settings, replicate_seed, run_experiment, run_experiment_file, simulated_dataset, write_outputs,
    ExperimentReport, ExperimentRun, MetricRow, ReplicateOutcome, ReplicateSummary, Timings, TraceRow,
};
pub use gait::{gait_dataset, gait_label, parse_gait_record, read_covariates, Covariates, GaitOptions, GAIT_COLUMNS};
pub use io::{functional_csv, load_dataset, save_dataset, scalar_csv, write_atomic};
pub use metrics::{classification_metrics, Confusion, Metrics};
pub use model::{evaluate, Block, CoefficientLabel, FeatureMap, FittedModel, ModelKind};
pub use pipeline::{fit_at_order, fit_model, ModelFit, PipelineSettings, Setting};
pub use split::{split, split_indices};
