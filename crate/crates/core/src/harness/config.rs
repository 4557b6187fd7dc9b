//! Plain-text experiment configuration.
//!
//! ```text
//! # comment
//! [data]
//! mode = simulate
//! seed = 42
//! d = 3
//! [model]
//! c_pen = auto
//! ```
//!
//! Section headers only group keys; every key may appear once. The
//! `SIGCLASS_SEED` environment variable overrides `seed` when the file is
//! read with [`load_config`].

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use super::model::ModelKind;
use super::pipeline::Setting;
use crate::error::{Error, Result};
use crate::selection::{DropMeasure, DEFAULT_RHO};

pub const SEED_ENV: &str = "SIGCLASS_SEED";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Simulate,
    Load,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub mode: Mode,
    pub seed: u64,
    pub d: usize,
    pub q: usize,
    pub n: usize,
    pub rho: f64,
    pub c_pen: Setting<f64>,
    pub cpen_drop: DropMeasure,
    pub lambda: Setting<f64>,
    pub p_max: Setting<usize>,
    pub noise_scale: f64,
    pub length_scale: f64,
    pub grid_size: usize,
    pub grid_sigma: Option<f64>,
    pub missing_prob: f64,
    pub test_fraction: f64,
    pub replicates: usize,
    pub folds: usize,
    pub model: ModelKind,
    pub k_grid: Option<Vec<usize>>,
    pub functional_file: Option<PathBuf>,
    pub scalar_file: Option<PathBuf>,
}

impl ExperimentConfig {
    /// Defaults for everything except the two required keys.
    pub fn new(mode: Mode, seed: u64) -> Self {
        Self {
            mode,
            seed,
            d: 2,
            q: 1,
            n: 1000,
            rho: DEFAULT_RHO,
            c_pen: Setting::Auto,
            cpen_drop: DropMeasure::default(),
            lambda: Setting::Auto,
            p_max: Setting::Auto,
            noise_scale: 0.1,
            length_scale: 1.0,
            grid_size: 100,
            grid_sigma: None,
            missing_prob: 0.0,
            test_fraction: 0.2,
            replicates: 1,
            folds: 5,
            model: ModelKind::Pslr,
            k_grid: None,
            functional_file: None,
            scalar_file: None,
        }
    }

    /// Every key with its effective value, sorted by key.
    pub fn echo(&self) -> BTreeMap<String, String> {
        fn setting<T: ToString + Copy>(s: Setting<T>) -> String {
            s.fixed().map_or_else(|| "auto".to_owned(), |v| v.to_string())
        }
        let mut m = BTreeMap::new();
        let mut put = |k: &str, v: String| {
            m.insert(k.to_owned(), v);
        };
        put("mode", if self.mode == Mode::Simulate { "simulate" } else { "load" }.into());
        put("seed", self.seed.to_string());
        put("model", self.model.to_string());
        put("rho", self.rho.to_string());
        put("c_pen", setting(self.c_pen));
        put("cpen_drop", self.cpen_drop.to_string());
        put("lambda", setting(self.lambda));
        put("p_max", setting(self.p_max));
        put("test_fraction", self.test_fraction.to_string());
        put("replicates", self.replicates.to_string());
        put("folds", self.folds.to_string());
        if let Some(k) = &self.k_grid {
            put("k_grid", k.iter().map(usize::to_string).collect::<Vec<_>>().join(","));
        }
        match self.mode {
            Mode::Simulate => {
                put("d", self.d.to_string());
                put("q", self.q.to_string());
                put("n", self.n.to_string());
                put("noise_scale", self.noise_scale.to_string());
                put("length_scale", self.length_scale.to_string());
                put("grid_size", self.grid_size.to_string());
                put("missing_prob", self.missing_prob.to_string());
                if let Some(s) = self.grid_sigma {
                    put("grid_sigma", s.to_string());
                }
            }
            Mode::Load => {
                for (k, p) in [("functional_file", &self.functional_file), ("scalar_file", &self.scalar_file)] {
                    if let Some(p) = p {
                        put(k, p.display().to_string());
                    }
                }
            }
        }
        m
    }

    /// Sets one key from its text form, as written in a config file.
    pub fn set(&mut self, key: &str, raw: &str) -> Result<()> {
        let (k, v) = (key, raw.trim());
        match k {
            "mode" => {
                self.mode = match v {
                    "simulate" => Mode::Simulate,
                    "load" => Mode::Load,
                    other => return Err(Error::Config(format!("unknown mode `{other}`"))),
                }
            }
            "seed" => self.seed = value(k, v)?,
            "d" => self.d = value(k, v)?,
            "q" => self.q = value(k, v)?,
            "n" => self.n = value(k, v)?,
            "rho" => self.rho = value(k, v)?,
            "c_pen" => self.c_pen = setting(k, v)?,
            "cpen_drop" => self.cpen_drop = v.parse()?,
            "lambda" => self.lambda = setting(k, v)?,
            "p_max" => self.p_max = setting(k, v)?,
            "noise_scale" => self.noise_scale = value(k, v)?,
            "length_scale" => self.length_scale = value(k, v)?,
            "grid_size" => self.grid_size = value(k, v)?,
            "grid_sigma" => self.grid_sigma = Some(value(k, v)?),
            "missing_prob" => self.missing_prob = value(k, v)?,
            "test_fraction" => self.test_fraction = value(k, v)?,
            "replicates" => self.replicates = value(k, v)?,
            "folds" => self.folds = value(k, v)?,
            "model" => self.model = v.parse()?,
            "k_grid" => {
                self.k_grid = Some(
                    v.split(',')
                        .map(|x| value(k, x.trim()))
                        .collect::<Result<Vec<usize>>>()?,
                )
            }
            "functional_file" => self.functional_file = Some(PathBuf::from(v)),
            "scalar_file" => self.scalar_file = Some(PathBuf::from(v)),
            other => return Err(Error::Config(format!("unknown key `{other}`"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.test_fraction > 0.0 && self.test_fraction < 1.0) {
            return Err(Error::Config(format!("test_fraction must lie in (0, 1), got {}", self.test_fraction)));
        }
        if !(self.rho > 0.0 && self.rho < 0.5) {
            return Err(Error::Config(format!("rho must lie in (0, 0.5), got {}", self.rho)));
        }
        if self.replicates == 0 {
            return Err(Error::Config("replicates must be at least 1".into()));
        }
        if self.folds < 2 {
            return Err(Error::Config("folds must be at least 2".into()));
        }
        if !(0.0..1.0).contains(&self.missing_prob) {
            return Err(Error::Config(format!("missing_prob must lie in [0, 1), got {}", self.missing_prob)));
        }
        if self.mode == Mode::Load && (self.functional_file.is_none() || self.scalar_file.is_none()) {
            return Err(Error::Config("mode = load needs functional_file and scalar_file".into()));
        }
        Ok(())
    }
}

fn value<T: FromStr>(key: &str, raw: &str) -> Result<T> {
    raw.parse()
        .map_err(|_| Error::Config(format!("`{key}`: cannot parse `{raw}`")))
}

fn setting<T: FromStr>(key: &str, raw: &str) -> Result<Setting<T>> {
    if raw == "auto" {
        Ok(Setting::Auto)
    } else {
        value(key, raw).map(Setting::Fixed)
    }
}

/// Parses configuration text. Relative paths are kept as written.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let mut pairs: BTreeMap<String, String> = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() || (line.starts_with('[') && line.ends_with(']')) {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", i + 1)))?;
        let (k, v) = (k.trim().to_owned(), v.trim().to_owned());
        if pairs.insert(k.clone(), v).is_some() {
            return Err(Error::Config(format!("line {}: `{k}` given twice", i + 1)));
        }
    }
    let mode = match pairs.remove("mode").as_deref() {
        Some("simulate") => Mode::Simulate,
        Some("load") => Mode::Load,
        Some(other) => return Err(Error::Config(format!("unknown mode `{other}`"))),
        None => return Err(Error::Config("missing required key `mode`".into())),
    };
    let seed = pairs
        .remove("seed")
        .ok_or_else(|| Error::Config("missing required key `seed`".into()))
        .and_then(|s| value("seed", &s))?;
    let mut cfg = ExperimentConfig::new(mode, seed);
    for (k, v) in pairs {
        cfg.set(&k, &v)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Reads a config file, resolves data paths against its directory and
/// applies the seed override from the environment.
pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)?;
    let mut cfg = parse_config(&text)?;
    let base = path.parent().unwrap_or(Path::new(""));
    for p in [&mut cfg.functional_file, &mut cfg.scalar_file].into_iter().flatten() {
        if p.is_relative() {
            *p = base.join(&*p);
        }
    }
    if let Ok(seed) = std::env::var(SEED_ENV) {
        cfg.seed = value(SEED_ENV, seed.trim())?;
    }
    Ok(cfg)
}
