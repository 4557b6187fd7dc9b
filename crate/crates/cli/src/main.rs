use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use serde_json::json;
use sigclass::harness::{
    evaluate, fit_model, gait_dataset, load_config, load_dataset, read_covariates, run_experiment, save_dataset,
    simulated_dataset, write_atomic, write_outputs, Dataset, ExperimentConfig, FittedModel, GaitOptions, Mode,
    ModelKind, PipelineSettings, Setting, SEED_ENV,
};
use sigclass::selection::{
    calibration_p_max, default_cpen_grid, default_lambda_grid, select_order, select_order_auto, slope_heuristic,
    tune_lambda_search_at, DropMeasure, PenaltySpec, CALIBRATION_MAX_FEATURES, DEFAULT_RHO, TUNING_ORDER,
};
use sigclass::sigcore::{sig_dim, word_at, word_name};

type CliResult<T = ()> = Result<T, Box<dyn std::error::Error>>;

/// Penalized signature logistic regression for functional and scalar data.
#[derive(Parser)]
#[command(name = "sigclass", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic two-class dataset.
    Simulate(SimulateArgs),
    /// Dump the signature-plus-scalar design matrix as CSV.
    Features(FeaturesArgs),
    /// Cross-validate the lasso weight.
    TuneLambda(TuneLambdaArgs),
    /// Calibrate the penalty constant with the slope heuristic.
    CalibrateCpen(CalibrateArgs),
    /// Select the truncation order for a fixed penalty constant.
    SelectOrder(SelectOrderArgs),
    /// Train a model and save it as JSON.
    Fit(FitArgs),
    /// Score a saved model on a dataset.
    Evaluate(EvaluateArgs),
    /// Run a full experiment from a config file and/or flags.
    Experiment(Box<ExperimentArgs>),
    /// Convert PhysioNet gait records to the CSV dataset format.
    ConvertGait(ConvertGaitArgs),
}

#[derive(Args)]
struct DataArgs {
    /// Functional CSV (`sample_id,channel,time,value`).
    #[arg(long)]
    functional: PathBuf,
    /// Scalar CSV (`sample_id,z_1,...,z_q,label`).
    #[arg(long)]
    scalars: PathBuf,
}

impl DataArgs {
    fn load(&self) -> CliResult<Dataset> {
        Ok(load_dataset(&self.functional, &self.scalars)?)
    }
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long, default_value_t = 2)]
    d: usize,
    #[arg(long, default_value_t = 1)]
    q: usize,
    #[arg(long, default_value_t = 1000)]
    n: usize,
    #[arg(long, env = SEED_ENV, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.1)]
    noise_scale: f64,
    #[arg(long, default_value_t = 1.0)]
    length_scale: f64,
    #[arg(long, default_value_t = 100)]
    grid_size: usize,
    /// Per-sample uneven grids with this log-spacing spread.
    #[arg(long)]
    grid_sigma: Option<f64>,
    #[arg(long, default_value_t = 0.0)]
    missing_prob: f64,
    #[command(flatten)]
    out: DataArgs,
}

#[derive(Args)]
struct FeaturesArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long)]
    order: usize,
    /// Leave the scalar covariates out.
    #[arg(long)]
    no_scalars: bool,
    /// Output CSV; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TuneLambdaArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long, default_value_t = 5)]
    folds: usize,
    #[arg(long, env = SEED_ENV, default_value_t = 0)]
    seed: u64,
    /// Signature order of the tuning design.
    #[arg(long, default_value_t = TUNING_ORDER)]
    order: usize,
    /// Comma-separated weights; 20 log-spaced values in [1e-4, 1] by default.
    #[arg(long, value_delimiter = ',')]
    grid: Option<Vec<f64>>,
}

#[derive(Args)]
struct CalibrateArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long)]
    lambda: f64,
    /// Largest order fitted; sized to the calibration feature cap by default.
    #[arg(long)]
    p_max: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_RHO)]
    rho: f64,
    #[arg(long, default_value_t = DropMeasure::Order)]
    cpen_drop: DropMeasure,
}

#[derive(Args)]
struct SelectOrderArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long)]
    lambda: f64,
    #[arg(long)]
    c_pen: f64,
    /// Largest order, or `auto` to grow until the criterion turns up.
    #[arg(long, default_value = "auto", value_parser = parse_setting::<usize>)]
    p_max: Setting<usize>,
    #[arg(long, default_value_t = DEFAULT_RHO)]
    rho: f64,
    /// Covariate count used in the penalty; the dataset's own by default.
    #[arg(long)]
    penalty_q: Option<usize>,
}

#[derive(Args)]
struct FitArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long, default_value_t = ModelKind::Pslr)]
    model: ModelKind,
    #[arg(long, default_value = "auto", value_parser = parse_setting::<f64>)]
    lambda: Setting<f64>,
    #[arg(long, default_value = "auto", value_parser = parse_setting::<f64>)]
    c_pen: Setting<f64>,
    #[arg(long, default_value = "auto", value_parser = parse_setting::<usize>)]
    p_max: Setting<usize>,
    #[arg(long, default_value_t = DEFAULT_RHO)]
    rho: f64,
    #[arg(long, default_value_t = 5)]
    folds: usize,
    #[arg(long, default_value_t = DropMeasure::Order)]
    cpen_drop: DropMeasure,
    /// Basis sizes tried by the baselines.
    #[arg(long, value_delimiter = ',')]
    k_grid: Option<Vec<usize>>,
    #[arg(long, env = SEED_ENV, default_value_t = 0)]
    seed: u64,
    /// Model JSON to write.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EvaluateArgs {
    #[arg(long)]
    model: PathBuf,
    #[command(flatten)]
    data: DataArgs,
    /// Also write per-sample probabilities to this CSV.
    #[arg(long)]
    predictions: Option<PathBuf>,
}

/// Every config key as a flag; a flag wins over the file.
#[derive(Args, Default)]
struct ConfigFlags {
    #[arg(long)]
    mode: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    d: Option<String>,
    #[arg(long)]
    q: Option<String>,
    #[arg(long)]
    n: Option<String>,
    #[arg(long)]
    rho: Option<String>,
    #[arg(long)]
    c_pen: Option<String>,
    #[arg(long)]
    cpen_drop: Option<String>,
    #[arg(long)]
    lambda: Option<String>,
    #[arg(long)]
    p_max: Option<String>,
    #[arg(long)]
    noise_scale: Option<String>,
    #[arg(long)]
    length_scale: Option<String>,
    #[arg(long)]
    grid_size: Option<String>,
    #[arg(long)]
    grid_sigma: Option<String>,
    #[arg(long)]
    missing_prob: Option<String>,
    #[arg(long)]
    test_fraction: Option<String>,
    #[arg(long)]
    replicates: Option<String>,
    #[arg(long)]
    folds: Option<String>,
    #[arg(long)]
    model: Option<String>,
    #[arg(long)]
    k_grid: Option<String>,
    #[arg(long)]
    functional_file: Option<String>,
    #[arg(long)]
    scalar_file: Option<String>,
}

impl ConfigFlags {
    fn pairs(&self) -> Vec<(&'static str, &Option<String>)> {
        vec![
            ("mode", &self.mode),
            ("seed", &self.seed),
            ("d", &self.d),
            ("q", &self.q),
            ("n", &self.n),
            ("rho", &self.rho),
            ("c_pen", &self.c_pen),
            ("cpen_drop", &self.cpen_drop),
            ("lambda", &self.lambda),
            ("p_max", &self.p_max),
            ("noise_scale", &self.noise_scale),
            ("length_scale", &self.length_scale),
            ("grid_size", &self.grid_size),
            ("grid_sigma", &self.grid_sigma),
            ("missing_prob", &self.missing_prob),
            ("test_fraction", &self.test_fraction),
            ("replicates", &self.replicates),
            ("folds", &self.folds),
            ("model", &self.model),
            ("k_grid", &self.k_grid),
            ("functional_file", &self.functional_file),
            ("scalar_file", &self.scalar_file),
        ]
    }
}

#[derive(Args)]
struct ExperimentArgs {
    /// Key = value config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Directory for report.json and the CSV tables.
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    keys: ConfigFlags,
}

#[derive(Args)]
struct ConvertGaitArgs {
    /// Record files such as `GaPt03_01.txt`.
    #[arg(required = true)]
    records: Vec<PathBuf>,
    #[arg(long, value_delimiter = ',', default_value = "L1,R1,R6,TL")]
    channels: Vec<String>,
    /// Time window in seconds, `start:end`.
    #[arg(long, value_parser = parse_window)]
    window: Option<(f64, f64)>,
    /// Keep every k-th row.
    #[arg(long, default_value_t = 1)]
    stride: usize,
    /// CSV `subject,<covariates...>` keyed by record or subject name.
    #[arg(long)]
    covariates: Option<PathBuf>,
    #[command(flatten)]
    out: DataArgs,
}

fn parse_setting<T: FromStr>(raw: &str) -> Result<Setting<T>, String> {
    if raw == "auto" {
        return Ok(Setting::Auto);
    }
    raw.parse().map(Setting::Fixed).map_err(|_| format!("expected a number or `auto`, got `{raw}`"))
}

fn parse_window(raw: &str) -> Result<(f64, f64), String> {
    let (a, b) = raw.split_once(':').ok_or("expected `start:end`")?;
    let a: f64 = a.trim().parse().map_err(|_| format!("bad start `{a}`"))?;
    let b: f64 = b.trim().parse().map_err(|_| format!("bad end `{b}`"))?;
    if b <= a {
        return Err("window end must exceed its start".into());
    }
    Ok((a, b))
}

fn print_json(value: &serde_json::Value) -> CliResult {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn simulate(a: SimulateArgs) -> CliResult {
    let mut cfg = ExperimentConfig::new(Mode::Simulate, a.seed);
    cfg.d = a.d;
    cfg.q = a.q;
    cfg.n = a.n;
    cfg.noise_scale = a.noise_scale;
    cfg.length_scale = a.length_scale;
    cfg.grid_size = a.grid_size;
    cfg.grid_sigma = a.grid_sigma;
    cfg.missing_prob = a.missing_prob;
    cfg.validate()?;
    let ds = simulated_dataset(&cfg, a.seed)?;
    save_dataset(&ds, &a.out.functional, &a.out.scalars)?;
    let (zeros, ones) = ds.class_counts();
    eprintln!("wrote {} samples ({zeros} / {ones} per class)", ds.len());
    Ok(())
}

fn features(a: FeaturesArgs) -> CliResult {
    let mut ds = a.data.load()?;
    if a.no_scalars {
        ds = ds.without_scalars();
    }
    let x = sigclass::features::signature_features(&ds, a.order)?;
    let sig_len = sig_dim(ds.alphabet(), a.order)?;
    let mut header = vec!["sample_id".to_owned()];
    header.extend((0..sig_len).map(|j| word_name(&word_at(ds.alphabet(), j))));
    header.extend(ds.meta().scalar_names.iter().cloned());
    let quote = |s: &str| format!("\"{s}\"");
    let mut text = header.iter().map(|h| quote(h)).collect::<Vec<_>>().join(",");
    text.push('\n');
    for (i, s) in ds.samples().iter().enumerate() {
        text.push_str(&s.id);
        for v in x.row(i).iter() {
            text.push_str(&format!(",{v}"));
        }
        text.push('\n');
    }
    match a.out {
        Some(path) => write_atomic(&path, text.as_bytes())?,
        None => print!("{text}"),
    }
    Ok(())
}

fn tune_lambda(a: TuneLambdaArgs) -> CliResult {
    let ds = a.data.load()?;
    let grid = a.grid.unwrap_or_else(default_lambda_grid);
    let search = tune_lambda_search_at(&ds, a.order, a.folds, &grid, a.seed)?;
    print_json(&serde_json::to_value(&search)?)
}

fn calibrate_cpen(a: CalibrateArgs) -> CliResult {
    let ds = a.data.load()?;
    let p_max = a
        .p_max
        .unwrap_or_else(|| calibration_p_max(ds.alphabet(), CALIBRATION_MAX_FEATURES));
    let s = slope_heuristic(&ds, a.lambda, &default_cpen_grid(), a.rho, p_max, a.cpen_drop)?;
    print_json(&json!({
        "c_pen": s.c_pen,
        "drop_at": s.drop_at,
        "p_max": p_max,
        "path": s.path.iter().map(|(c, p)| json!({"c_pen": c, "p_hat": p})).collect::<Vec<_>>(),
    }))
}

fn select(a: SelectOrderArgs) -> CliResult {
    let ds = a.data.load()?;
    let q = a.penalty_q.unwrap_or(ds.q());
    let spec = PenaltySpec::new(a.c_pen, a.rho, q, ds.len(), ds.alphabet())?;
    let trace = match a.p_max {
        Setting::Fixed(p) => select_order(&ds, a.lambda, &spec, p)?,
        Setting::Auto => select_order_auto(&ds, a.lambda, &spec)?,
    };
    let rows: Vec<_> = trace
        .records
        .iter()
        .map(|r| json!({"p": r.p, "risk": r.empirical_risk, "penalty": r.penalty, "criterion": r.criterion}))
        .collect();
    print_json(&json!({"p_hat": trace.selected_p, "trace": rows}))
}

fn fit(a: FitArgs) -> CliResult {
    let ds = a.data.load()?;
    let settings = PipelineSettings {
        lambda: a.lambda,
        c_pen: a.c_pen,
        p_max: a.p_max,
        rho: a.rho,
        folds: a.folds,
        cpen_drop: a.cpen_drop,
        k_grid: a.k_grid,
        seed: a.seed,
        ..PipelineSettings::default()
    };
    let fit = fit_model(a.model, &ds, &settings)?;
    fit.model.save(&a.out)?;
    print_json(&json!({
        "model": a.model.name(),
        "lambda": fit.model.lambda,
        "c_pen": fit.model.c_pen,
        "p_hat": fit.model.p_hat,
        "nonzero": fit.model.coefficient_labels().iter().filter(|c| c.value != 0.0).count(),
    }))
}

fn evaluate_cmd(a: EvaluateArgs) -> CliResult {
    let model = FittedModel::load(&a.model)?;
    let ds = a.data.load()?;
    let metrics = evaluate(&model, &ds)?;
    if let Some(path) = &a.predictions {
        let probs = model.predict_proba(&ds)?;
        let mut text = String::from("sample_id,probability,label\n");
        for (s, p) in ds.samples().iter().zip(probs) {
            text.push_str(&format!("{},{p},{}\n", s.id, s.label));
        }
        write_atomic(path, text.as_bytes())?;
    }
    print_json(&serde_json::to_value(metrics)?)
}

fn experiment_config(a: &ExperimentArgs) -> CliResult<ExperimentConfig> {
    let flag_seed = a.keys.seed.is_some();
    let mut cfg = match &a.config {
        Some(path) => load_config(path)?,
        None => {
            let mode = a.keys.mode.as_deref().ok_or("without --config, --mode is required")?;
            let seed = match (&a.keys.seed, std::env::var(SEED_ENV)) {
                (Some(s), _) => s.clone(),
                (None, Ok(s)) => s,
                (None, Err(_)) => return Err(format!("without --config, --seed or {SEED_ENV} is required").into()),
            };
            let mut cfg = ExperimentConfig::new(Mode::Simulate, 0);
            cfg.set("mode", mode)?;
            cfg.set("seed", &seed)?;
            cfg
        }
    };
    for (key, value) in a.keys.pairs() {
        if let Some(v) = value {
            cfg.set(key, v)?;
        }
    }
    // the environment still beats the file when no flag was given
    if !flag_seed {
        if let Ok(s) = std::env::var(SEED_ENV) {
            cfg.set("seed", &s)?;
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

fn experiment(a: ExperimentArgs) -> CliResult {
    let cfg = experiment_config(&a)?;
    let run = run_experiment(&cfg)?;
    write_outputs(&run, &a.out)?;
    let r = &run.report;
    print_json(&json!({
        "out": a.out.display().to_string(),
        "replicates": r.replicates.len(),
        "mean_accuracy": r.mean_accuracy,
        "lambda": r.lambda,
        "c_pen": r.c_pen,
        "p_hat": r.p_hat,
    }))
}

fn record_name(path: &Path) -> String {
    path.file_stem().map_or_else(|| path.display().to_string(), |s| s.to_string_lossy().into_owned())
}

fn convert_gait(a: ConvertGaitArgs) -> CliResult {
    let records = a
        .records
        .iter()
        .map(|p| Ok((record_name(p), std::fs::read_to_string(p)?)))
        .collect::<CliResult<Vec<_>>>()?;
    let covariates = a.covariates.as_deref().map(read_covariates).transpose()?;
    let opts = GaitOptions {
        channels: a.channels,
        window: a.window,
        stride: a.stride,
    };
    let ds = gait_dataset(&records, covariates.as_ref(), &opts)?;
    save_dataset(&ds, &a.out.functional, &a.out.scalars)?;
    eprintln!("converted {} records", ds.len());
    Ok(())
}

fn main() -> ExitCode {
    let result = match Cli::parse().command {
        Command::Simulate(a) => simulate(a),
        Command::Features(a) => features(a),
        Command::TuneLambda(a) => tune_lambda(a),
        Command::CalibrateCpen(a) => calibrate_cpen(a),
        Command::SelectOrder(a) => select(a),
        Command::Fit(a) => fit(a),
        Command::Evaluate(a) => evaluate_cmd(a),
        Command::Experiment(a) => experiment(*a),
        Command::ConvertGait(a) => convert_gait(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
