//! Converter for the PhysioNet gait-in-Parkinson's text layout.
//!
//! A record file holds whitespace-separated rows of 19 numbers: time in
//! seconds, the eight left-foot sensors `L1`..`L8`, the eight right-foot
//! sensors `R1`..`R8`, then the foot totals `TL` and `TR`. Record names follow
//! `Ga{Co|Pt}NN_MM` (also `Ju`, `Si` prefixes); `Pt` marks a patient (label 1)
//! and `Co` a control (label 0).
//!
//! Conversion keeps the chosen columns, optionally cuts a time window, keeps
//! every `stride`-th row and rescales time to `[0, 1]`. Stride or cycle
//! segmentation beyond that is up to the caller.
//!
//! Scalar covariates come from an optional CSV `subject,<names...>` keyed by
//! the full record name or by the subject part before `_`.

use std::collections::HashMap;
use std::path::Path;

use super::data::{Dataset, DatasetMeta, Sample};
use crate::error::{Error, Result};
use crate::sigcore::ChannelSeries;

/// Column names after the time column, in file order.
pub const GAIT_COLUMNS: [&str; 18] = [
    "L1", "L2", "L3", "L4", "L5", "L6", "L7", "L8", "R1", "R2", "R3", "R4", "R5", "R6", "R7", "R8", "TL", "TR",
];

#[derive(Debug, Clone, PartialEq)]
pub struct GaitOptions {
    pub channels: Vec<String>,
    /// Keep rows with `start <= time <= end` (seconds).
    pub window: Option<(f64, f64)>,
    pub stride: usize,
}

impl Default for GaitOptions {
    fn default() -> Self {
        Self {
            channels: ["L1", "R1", "R6", "TL"].map(String::from).to_vec(),
            window: None,
            stride: 1,
        }
    }
}

/// Label from a record name: 1 for `Pt`, 0 for `Co`.
pub fn gait_label(record: &str) -> Result<u8> {
    let tag = record.get(2..4).unwrap_or("");
    match tag {
        "Pt" => Ok(1),
        "Co" => Ok(0),
        _ => Err(Error::invalid(format!("record `{record}`: cannot tell patient from control"))),
    }
}

fn column(name: &str) -> Result<usize> {
    GAIT_COLUMNS
        .iter()
        .position(|c| c.eq_ignore_ascii_case(name))
        .map(|i| i + 1)
        .ok_or_else(|| Error::invalid(format!("unknown gait column `{name}`")))
}

/// Parses one record into channel series on normalized time.
pub fn parse_gait_record(record: &str, text: &str, opts: &GaitOptions) -> Result<Vec<ChannelSeries>> {
    if opts.stride == 0 {
        return Err(Error::invalid("stride must be at least 1"));
    }
    let cols = opts.channels.iter().map(|c| column(c)).collect::<Result<Vec<_>>>()?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let row = line
            .split_whitespace()
            .map(str::parse::<f64>)
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::invalid(format!("record `{record}` line {}: {e}", i + 1)))?;
        if row.len() != 19 {
            return Err(Error::invalid(format!(
                "record `{record}` line {}: expected 19 columns, found {}",
                i + 1,
                row.len()
            )));
        }
        if opts.window.is_none_or(|(a, b)| row[0] >= a && row[0] <= b) {
            rows.push(row);
        }
    }
    let rows: Vec<_> = rows.into_iter().step_by(opts.stride).collect();
    if rows.len() < 2 {
        return Err(Error::invalid(format!("record `{record}`: fewer than two rows kept")));
    }
    let (t0, t1) = (rows[0][0], rows[rows.len() - 1][0]);
    if t1 <= t0 {
        return Err(Error::invalid(format!("record `{record}`: time does not advance")));
    }
    let times: Vec<f64> = rows.iter().map(|r| (r[0] - t0) / (t1 - t0)).collect();
    cols.iter()
        .enumerate()
        .map(|(k, &c)| ChannelSeries::new(k, times.clone(), rows.iter().map(|r| r[c]).collect()))
        .collect()
}

/// Covariate table: column names and rows keyed by subject or record.
pub type Covariates = (Vec<String>, HashMap<String, Vec<f64>>);

pub fn read_covariates(path: &Path) -> Result<Covariates> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path)?;
    let names: Vec<String> = rdr.headers()?.iter().skip(1).map(str::to_owned).collect();
    let mut rows = HashMap::new();
    for record in rdr.records() {
        let record = record?;
        let values = record
            .iter()
            .skip(1)
            .map(|v| v.parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::invalid(format!("covariates `{}`: {e}", &record[0])))?;
        if values.len() != names.len() {
            return Err(Error::invalid(format!("covariates `{}`: wrong field count", &record[0])));
        }
        rows.insert(record[0].to_owned(), values);
    }
    Ok((names, rows))
}

/// Builds a dataset from `(record name, file text)` pairs.
pub fn gait_dataset(records: &[(String, String)], covariates: Option<&Covariates>, opts: &GaitOptions) -> Result<Dataset> {
    let mut meta = DatasetMeta::new(opts.channels.len(), 0, "physionet-gait");
    if let Some((names, _)) = covariates {
        meta.scalar_names = names.clone();
    }
    meta.notes.push(format!("channels {}", opts.channels.join(",")));
    let samples = records
        .iter()
        .map(|(name, text)| {
            let scalars = match covariates {
                None => Vec::new(),
                Some((_, rows)) => {
                    let subject = name.split('_').next().unwrap_or(name);
                    rows.get(name)
                        .or_else(|| rows.get(subject))
                        .cloned()
                        .ok_or_else(|| Error::invalid(format!("no covariates for `{name}`")))?
                }
            };
            Ok(Sample {
                id: name.clone(),
                channels: parse_gait_record(name, text, opts)?,
                scalars,
                label: gait_label(name)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Dataset::new(samples, meta)
}
