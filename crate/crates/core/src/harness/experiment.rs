//! Replicated train/test experiments and their report files.

use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{load_config, ExperimentConfig, Mode};
use super::data::Dataset;
use super::io::{load_dataset, write_atomic};
use super::model::{evaluate, CoefficientLabel};
use super::pipeline::{fit_model, ModelFit, PipelineSettings};
use super::split::split;
use crate::error::{Error, Result, StageContext};
use crate::rng::{derive_seed, streams};
use crate::synth::{apply_missing, generate_dataset, ScenarioConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub p: usize,
    pub risk: f64,
    pub penalty: f64,
    pub criterion: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricRow {
    pub replicate: usize,
    pub accuracy: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicateSummary {
    pub replicate: usize,
    pub seed: u64,
    pub lambda: f64,
    pub c_pen: Option<f64>,
    pub p_hat: Option<usize>,
    pub accuracy: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub total_seconds: f64,
    /// Per replicate, `(stage, seconds)` in execution order.
    pub replicates: Vec<Vec<(String, f64)>>,
}

/// Report of a run. Top-level `lambda`, `c_pen`, `p_hat`, `trace` and
/// `coefficients` describe replicate 0; `metrics` covers every replicate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: BTreeMap<String, String>,
    pub lambda: f64,
    pub c_pen: Option<f64>,
    pub p_hat: Option<usize>,
    pub trace: Vec<TraceRow>,
    pub coefficients: Vec<CoefficientLabel>,
    pub metrics: Vec<MetricRow>,
    pub replicates: Vec<ReplicateSummary>,
    pub mean_accuracy: f64,
    pub mean_f1: f64,
    pub timings: Timings,
}

impl ExperimentReport {
    /// JSON with a trailing newline; keys in declaration order.
    pub fn to_json(&self) -> Result<Vec<u8>> {
        let mut v = serde_json::to_vec_pretty(self)?;
        v.push(b'\n');
        Ok(v)
    }
}

/// Everything one replicate produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicateOutcome {
    pub replicate: usize,
    pub seed: u64,
    pub fit: ModelFit,
    pub accuracy: f64,
    pub f1: f64,
    pub timings: Vec<(String, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentRun {
    pub report: ExperimentReport,
    pub outcomes: Vec<ReplicateOutcome>,
}

/// Seed of replicate `r`; every other stream of the replicate derives from it.
pub fn replicate_seed(seed: u64, r: usize) -> u64 {
    derive_seed(seed, streams::REPLICATE, r as u64)
}

/// The data a simulated replicate works on.
pub fn simulated_dataset(cfg: &ExperimentConfig, rep_seed: u64) -> Result<Dataset> {
    let scenario = ScenarioConfig {
        d: cfg.d,
        q: cfg.q,
        n: cfg.n,
        grid_size: cfg.grid_size,
        noise_scale: cfg.noise_scale,
        length_scale: cfg.length_scale,
        grid_sigma: cfg.grid_sigma,
        seed: rep_seed,
    };
    let ds = generate_dataset(&scenario)?;
    if cfg.missing_prob > 0.0 {
        apply_missing(&ds, cfg.missing_prob, derive_seed(rep_seed, streams::MISSING, 0))
    } else {
        Ok(ds)
    }
}

pub fn pipeline_settings(cfg: &ExperimentConfig, rep_seed: u64) -> PipelineSettings {
    PipelineSettings {
        lambda: cfg.lambda,
        c_pen: cfg.c_pen,
        cpen_drop: cfg.cpen_drop,
        p_max: cfg.p_max,
        rho: cfg.rho,
        folds: cfg.folds,
        k_grid: cfg.k_grid.clone(),
        seed: derive_seed(rep_seed, streams::FOLDS, 0),
        ..PipelineSettings::default()
    }
}

fn run_replicate(cfg: &ExperimentConfig, loaded: Option<&Dataset>, r: usize) -> Result<ReplicateOutcome> {
    let rep_seed = replicate_seed(cfg.seed, r);
    let mut timings = Vec::new();
    let t = Instant::now();
    let owned;
    let data = match loaded {
        Some(d) => d,
        None => {
            owned = simulated_dataset(cfg, rep_seed).stage("simulate")?;
            timings.push(("simulate".to_owned(), t.elapsed().as_secs_f64()));
            &owned
        }
    };
    let (train, test) = split(data, cfg.test_fraction, derive_seed(rep_seed, streams::SPLIT, 0)).stage("split")?;
    let fit = fit_model(cfg.model, &train, &pipeline_settings(cfg, rep_seed))?;
    timings.extend(fit.timings.iter().cloned());
    let t = Instant::now();
    let metrics = evaluate(&fit.model, &test).stage("evaluate")?;
    timings.push(("evaluate".to_owned(), t.elapsed().as_secs_f64()));
    Ok(ReplicateOutcome {
        replicate: r,
        seed: rep_seed,
        accuracy: metrics.accuracy,
        f1: metrics.f1,
        fit,
        timings,
    })
}

/// Runs every replicate (in parallel; results are in replicate order and do
/// not depend on scheduling).
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentRun> {
    cfg.validate()?;
    let start = Instant::now();
    let loaded = match cfg.mode {
        Mode::Load => {
            let (f, s) = cfg
                .functional_file
                .as_deref()
                .zip(cfg.scalar_file.as_deref())
                .ok_or_else(|| Error::Config("mode = load needs functional_file and scalar_file".into()))?;
            Some(load_dataset(f, s).stage("load")?)
        }
        Mode::Simulate => None,
    };
    let outcomes = (0..cfg.replicates)
        .into_par_iter()
        .map(|r| run_replicate(cfg, loaded.as_ref(), r))
        .collect::<Result<Vec<_>>>()?;
    let first = &outcomes[0].fit;
    let trace = first
        .trace
        .as_ref()
        .map(|t| {
            t.records
                .iter()
                .map(|r| TraceRow {
                    p: r.p,
                    risk: r.empirical_risk,
                    penalty: r.penalty,
                    criterion: r.criterion,
                })
                .collect()
        })
        .unwrap_or_default();
    let n = outcomes.len() as f64;
    let report = ExperimentReport {
        config: cfg.echo(),
        lambda: first.model.lambda,
        c_pen: first.model.c_pen,
        p_hat: first.model.p_hat,
        trace,
        coefficients: first.model.coefficient_labels(),
        metrics: outcomes
            .iter()
            .map(|o| MetricRow {
                replicate: o.replicate,
                accuracy: o.accuracy,
                f1: o.f1,
            })
            .collect(),
        replicates: outcomes
            .iter()
            .map(|o| ReplicateSummary {
                replicate: o.replicate,
                seed: o.seed,
                lambda: o.fit.model.lambda,
                c_pen: o.fit.model.c_pen,
                p_hat: o.fit.model.p_hat,
                accuracy: o.accuracy,
                f1: o.f1,
            })
            .collect(),
        mean_accuracy: outcomes.iter().map(|o| o.accuracy).sum::<f64>() / n,
        mean_f1: outcomes.iter().map(|o| o.f1).sum::<f64>() / n,
        timings: Timings {
            total_seconds: start.elapsed().as_secs_f64(),
            replicates: outcomes.iter().map(|o| o.timings.clone()).collect(),
        },
    };
    Ok(ExperimentRun { report, outcomes })
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map_or_else(String::new, |x| x.to_string())
}

fn csv_bytes(header: &[&str], rows: Vec<Vec<String>>) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    w.into_inner().map_err(|e| Error::Io(e.into_error()))
}

/// Writes `report.json` and the CSV side tables into `dir`.
pub fn write_outputs(run: &ExperimentRun, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    write_atomic(&dir.join("report.json"), &run.report.to_json()?)?;
    let o = &run.outcomes;

    let trace = o
        .iter()
        .flat_map(|x| {
            x.fit.trace.iter().flat_map(move |t| {
                t.records.iter().map(move |r| {
                    vec![
                        x.replicate.to_string(),
                        r.p.to_string(),
                        r.empirical_risk.to_string(),
                        r.penalty.to_string(),
                        r.criterion.to_string(),
                        (r.p == t.selected_p).to_string(),
                    ]
                })
            })
        })
        .collect();
    write_atomic(
        &dir.join("trace.csv"),
        &csv_bytes(&["replicate", "p", "risk", "penalty", "criterion", "selected"], trace)?,
    )?;

    let cpen = o
        .iter()
        .flat_map(|x| {
            x.fit.slope.iter().flat_map(move |s| {
                s.path
                    .iter()
                    .map(move |(c, p)| vec![x.replicate.to_string(), c.to_string(), p.to_string()])
            })
        })
        .collect();
    write_atomic(&dir.join("cpen_trace.csv"), &csv_bytes(&["replicate", "c_pen", "p_hat"], cpen)?)?;

    let coefs = o
        .iter()
        .flat_map(|x| {
            x.fit.model.coefficient_labels().into_iter().map(move |c| {
                let block = match c.level_or_scalar {
                    super::model::Block::Level(l) => l.to_string(),
                    super::model::Block::Named(s) => s,
                };
                vec![x.replicate.to_string(), c.index.to_string(), block, c.name, c.value.to_string()]
            })
        })
        .collect();
    write_atomic(
        &dir.join("coefficients.csv"),
        &csv_bytes(&["replicate", "index", "level_or_scalar", "name", "value"], coefs)?,
    )?;

    let levels = o
        .iter()
        .flat_map(|x| {
            x.fit
                .model
                .level_magnitudes()
                .into_iter()
                .map(move |(l, m)| vec![x.replicate.to_string(), l.to_string(), m.to_string()])
        })
        .collect();
    write_atomic(
        &dir.join("level_magnitudes.csv"),
        &csv_bytes(&["replicate", "level", "l1_norm"], levels)?,
    )?;

    let reps = run
        .report
        .replicates
        .iter()
        .map(|r| {
            vec![
                r.replicate.to_string(),
                r.seed.to_string(),
                r.accuracy.to_string(),
                r.f1.to_string(),
                r.lambda.to_string(),
                opt(r.c_pen),
                opt(r.p_hat),
            ]
        })
        .collect();
    write_atomic(
        &dir.join("replicates.csv"),
        &csv_bytes(&["replicate", "seed", "accuracy", "f1", "lambda", "c_pen", "p_hat"], reps)?,
    )
}

/// Loads a config file, runs it and writes the outputs into `out_dir`.
pub fn run_experiment_file(config_file: &Path, out_dir: &Path) -> Result<ExperimentReport> {
    let cfg = load_config(config_file)?;
    let run = run_experiment(&cfg)?;
    write_outputs(&run, out_dir)?;
    Ok(run.report)
}
