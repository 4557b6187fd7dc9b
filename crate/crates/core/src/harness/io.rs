//! CSV dataset files.
//!
//! Functional file: `sample_id,channel,time,value`, one observation per row,
//! channels 0-based. Scalar file: `sample_id,z_1,...,z_q,label`, one row per
//! sample. Sample order follows the scalar file.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::io::Write;
use std::path::Path;

use super::data::{Dataset, DatasetMeta, Sample};
use crate::error::{Error, Result};
use crate::sigcore::ChannelSeries;

fn parse_err(path: &Path, line: u64, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

fn reader(path: &Path) -> Result<csv::Reader<fs::File>> {
    let file = fs::File::open(path)?;
    Ok(csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(file))
}

fn field<T: std::str::FromStr>(path: &Path, line: u64, record: &csv::StringRecord, i: usize, what: &str) -> Result<T> {
    let raw = record.get(i).ok_or_else(|| parse_err(path, line, format!("missing {what}")))?;
    raw.parse()
        .map_err(|_| parse_err(path, line, format!("cannot parse {what} `{raw}`")))
}

type Observations = BTreeMap<usize, Vec<(f64, f64, u64)>>;

fn read_functional(path: &Path) -> Result<(HashMap<String, Observations>, Vec<String>)> {
    let mut rdr = reader(path)?;
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
    if header != ["sample_id", "channel", "time", "value"] {
        return Err(parse_err(path, 1, "header must be `sample_id,channel,time,value`"));
    }
    let mut by_id: HashMap<String, Observations> = HashMap::new();
    let mut order = Vec::new();
    for record in rdr.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != 4 {
            return Err(parse_err(path, line, format!("expected 4 fields, found {}", record.len())));
        }
        let id = record[0].to_owned();
        let channel: usize = field(path, line, &record, 1, "channel")?;
        let time: f64 = field(path, line, &record, 2, "time")?;
        let value: f64 = field(path, line, &record, 3, "value")?;
        if !time.is_finite() || !value.is_finite() {
            return Err(parse_err(path, line, "non-finite time or value"));
        }
        let entry = by_id.entry(id.clone()).or_insert_with(|| {
            order.push(id);
            Observations::new()
        });
        entry.entry(channel).or_default().push((time, value, line));
    }
    for obs in by_id.values_mut().flat_map(|o| o.values_mut()) {
        obs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.2.cmp(&b.2)));
        if let Some(w) = obs.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(parse_err(
                path,
                w[1].2,
                format!("duplicate (sample, channel, time) row, first seen on line {}", w[0].2),
            ));
        }
    }
    Ok((by_id, order))
}

struct ScalarRow {
    id: String,
    values: Vec<f64>,
    label: u8,
    line: u64,
}

fn read_scalars(path: &Path) -> Result<(Vec<String>, Vec<ScalarRow>)> {
    let mut rdr = reader(path)?;
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
    if header.len() < 2 || header[0] != "sample_id" || header[header.len() - 1] != "label" {
        return Err(parse_err(path, 1, "header must be `sample_id,<scalars...>,label`"));
    }
    let names = header[1..header.len() - 1].to_vec();
    let mut rows = Vec::new();
    let mut seen = HashMap::new();
    for record in rdr.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != header.len() {
            return Err(parse_err(
                path,
                line,
                format!("expected {} fields, found {}", header.len(), record.len()),
            ));
        }
        let id = record[0].to_owned();
        if let Some(first) = seen.insert(id.clone(), line) {
            return Err(parse_err(path, line, format!("sample `{id}` repeated, first seen on line {first}")));
        }
        let values = (1..header.len() - 1)
            .map(|i| field::<f64>(path, line, &record, i, &header[i]))
            .collect::<Result<Vec<_>>>()?;
        if values.iter().any(|v| !v.is_finite()) {
            return Err(parse_err(path, line, "non-finite scalar"));
        }
        let label_raw = &record[header.len() - 1];
        let label = match label_raw {
            "0" => 0,
            "1" => 1,
            other => return Err(parse_err(path, line, format!("label `{other}` is not 0 or 1"))),
        };
        rows.push(ScalarRow { id, values, label, line });
    }
    Ok((names, rows))
}

/// Reads and joins a functional file and a scalar file.
pub fn load_dataset(functional_file: &Path, scalar_file: &Path) -> Result<Dataset> {
    let (mut functional, order) = read_functional(functional_file)?;
    let (names, rows) = read_scalars(scalar_file)?;
    if let Some(row) = rows.iter().find(|r| !functional.contains_key(&r.id)) {
        return Err(parse_err(
            scalar_file,
            row.line,
            format!("sample `{}` has no functional observations", row.id),
        ));
    }
    let scalar_ids: std::collections::HashSet<&str> = rows.iter().map(|r| r.id.as_str()).collect();
    if let Some(id) = order.iter().find(|id| !scalar_ids.contains(id.as_str())) {
        return Err(Error::invalid(format!(
            "{}: sample `{id}` has no row in {}",
            functional_file.display(),
            scalar_file.display()
        )));
    }
    let channels = functional
        .values()
        .filter_map(|o| o.keys().next_back())
        .max()
        .map_or(0, |m| m + 1);
    let mut samples = Vec::with_capacity(rows.len());
    for row in rows {
        let obs = functional.remove(&row.id).unwrap_or_default();
        let mut series = Vec::with_capacity(channels);
        for c in 0..channels {
            let points = obs.get(&c).ok_or_else(|| {
                Error::invalid(format!("sample `{}` has no observations for channel {c}", row.id))
            })?;
            let (times, values): (Vec<f64>, Vec<f64>) = points.iter().map(|&(t, v, _)| (t, v)).unzip();
            let s = ChannelSeries::new(c, times, values).map_err(|e| {
                parse_err(functional_file, points[0].2, format!("sample `{}` channel {c}: {e}", row.id))
            })?;
            series.push(s);
        }
        samples.push(Sample {
            id: row.id,
            channels: series,
            scalars: row.values,
            label: row.label,
        });
    }
    let mut meta = DatasetMeta::new(channels, names.len(), format!("loaded from {}", functional_file.display()));
    meta.scalar_names = names;
    Dataset::new(samples, meta)
}

/// Writes `bytes` to a temporary sibling of `path`, then renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path
        .file_name()
        .ok_or_else(|| Error::invalid(format!("{} is not a file path", path.display())))?;
    let tmp = dir.join(format!(".{}.{}.tmp", name.to_string_lossy(), std::process::id()));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn functional_csv(dataset: &Dataset) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["sample_id", "channel", "time", "value"])?;
    for s in dataset.samples() {
        for c in &s.channels {
            for (t, v) in c.times().iter().zip(c.values()) {
                w.write_record([s.id.clone(), c.channel().to_string(), t.to_string(), v.to_string()])?;
            }
        }
    }
    w.into_inner().map_err(|e| Error::Io(e.into_error()))
}

pub fn scalar_csv(dataset: &Dataset) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["sample_id".to_owned()];
    header.extend(dataset.meta().scalar_names.iter().cloned());
    header.push("label".into());
    w.write_record(&header)?;
    for s in dataset.samples() {
        let mut row = vec![s.id.clone()];
        row.extend(s.scalars.iter().map(f64::to_string));
        row.push(s.label.to_string());
        w.write_record(&row)?;
    }
    w.into_inner().map_err(|e| Error::Io(e.into_error()))
}

/// Writes both files atomically. Floats use the shortest round-trip form.
pub fn save_dataset(dataset: &Dataset, functional_file: &Path, scalar_file: &Path) -> Result<()> {
    write_atomic(functional_file, &functional_csv(dataset)?)?;
    write_atomic(scalar_file, &scalar_csv(dataset)?)
}
