use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sigcore::{interpolate_path, time_augment, AugmentedPath, ChannelSeries};

/// One functional sample with its scalar covariates and binary label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub id: String,
    pub channels: Vec<ChannelSeries>,
    pub scalars: Vec<f64>,
    pub label: u8,
}

impl Sample {
    /// Piecewise-linear interpolation of the channels, time augmented.
    pub fn augmented_path(&self) -> Result<AugmentedPath> {
        let path = interpolate_path(&self.channels, self.channels.len())?;
        Ok(time_augment(&path))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetMeta {
    /// Number of functional channels (the path dimension before time augmentation).
    pub channels: usize,
    pub scalar_names: Vec<String>,
    pub provenance: String,
    pub seed: Option<u64>,
    /// Free-form notes, e.g. parameterization choices of a generator.
    pub notes: Vec<String>,
}

impl DatasetMeta {
    pub fn new(channels: usize, scalars: usize, provenance: impl Into<String>) -> Self {
        Self {
            channels,
            scalar_names: (1..=scalars).map(|j| format!("z_{j}")).collect(),
            provenance: provenance.into(),
            seed: None,
            notes: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    samples: Vec<Sample>,
    meta: DatasetMeta,
}

impl Dataset {
    pub fn new(samples: Vec<Sample>, meta: DatasetMeta) -> Result<Self> {
        let q = meta.scalar_names.len();
        if meta.channels == 0 {
            return Err(Error::invalid("a dataset needs at least one functional channel"));
        }
        for s in &samples {
            if s.channels.len() != meta.channels {
                return Err(Error::invalid(format!(
                    "sample {}: {} channels, expected {}",
                    s.id,
                    s.channels.len(),
                    meta.channels
                )));
            }
            let mut seen = vec![false; meta.channels];
            for c in &s.channels {
                if c.channel() >= meta.channels || std::mem::replace(&mut seen[c.channel()], true) {
                    return Err(Error::invalid(format!(
                        "sample {}: channel index {} out of range or repeated",
                        s.id,
                        c.channel()
                    )));
                }
            }
            if s.scalars.len() != q {
                return Err(Error::invalid(format!(
                    "sample {}: {} scalars, expected {q}",
                    s.id,
                    s.scalars.len()
                )));
            }
            if s.scalars.iter().any(|v| !v.is_finite()) {
                return Err(Error::invalid(format!("sample {}: non-finite scalar", s.id)));
            }
            if s.label > 1 {
                return Err(Error::NonBinaryLabel(s.label));
            }
        }
        Ok(Self { samples, meta })
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn meta(&self) -> &DatasetMeta {
        &self.meta
    }

    pub fn meta_mut(&mut self) -> &mut DatasetMeta {
        &mut self.meta
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Functional channels, `d - 1`.
    pub fn channels(&self) -> usize {
        self.meta.channels
    }

    /// Signature alphabet size `d`: channels plus time.
    pub fn alphabet(&self) -> usize {
        self.meta.channels + 1
    }

    /// Scalar covariates per sample, `q`.
    pub fn q(&self) -> usize {
        self.meta.scalar_names.len()
    }

    pub fn labels(&self) -> Vec<u8> {
        self.samples.iter().map(|s| s.label).collect()
    }

    /// `(count of label 0, count of label 1)`.
    pub fn class_counts(&self) -> (usize, usize) {
        let ones = self.samples.iter().filter(|s| s.label == 1).count();
        (self.samples.len() - ones, ones)
    }

    pub fn require_both_classes(&self, what: &str) -> Result<()> {
        let (zeros, ones) = self.class_counts();
        if zeros == 0 || ones == 0 {
            return Err(Error::SingleClass(format!(
                "{what} has {zeros} samples of class 0 and {ones} of class 1"
            )));
        }
        Ok(())
    }

    /// Samples at `indices`, in that order.
    pub fn subset(&self, indices: &[usize]) -> Self {
        Self {
            samples: indices.iter().map(|&i| self.samples[i].clone()).collect(),
            meta: self.meta.clone(),
        }
    }

    /// Same functional data with the scalar covariates removed.
    pub fn without_scalars(&self) -> Self {
        let mut meta = self.meta.clone();
        meta.scalar_names.clear();
        Self {
            samples: self
                .samples
                .iter()
                .map(|s| Sample {
                    scalars: Vec::new(),
                    ..s.clone()
                })
                .collect(),
            meta,
        }
    }

    /// Time-augmented paths of every sample, computed in parallel.
    pub fn augmented_paths(&self) -> Result<Vec<AugmentedPath>> {
        self.samples
            .par_iter()
            .map(|s| {
                s.augmented_path()
                    .map_err(|e| Error::invalid(format!("sample {}: {e}", s.id)))
            })
            .collect()
    }

    pub(crate) fn map_samples(&self, f: impl Fn(usize, &Sample) -> Result<Sample> + Sync) -> Result<Self> {
        Ok(Self {
            samples: self
                .samples
                .par_iter()
                .enumerate()
                .map(|(i, s)| f(i, s))
                .collect::<Result<Vec<_>>>()?,
            meta: self.meta.clone(),
        })
    }
}
