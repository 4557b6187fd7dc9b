use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
    pub tn: usize,
}

impl Confusion {
    pub fn from_labels(predicted: &[u8], truth: &[u8]) -> Result<Self> {
        if predicted.len() != truth.len() {
            return Err(Error::DimensionMismatch {
                expected: truth.len(),
                found: predicted.len(),
            });
        }
        let mut c = Confusion::default();
        for (&p, &y) in predicted.iter().zip(truth) {
            match (p, y) {
                (1, 1) => c.tp += 1,
                (1, 0) => c.fp += 1,
                (0, 1) => c.fn_ += 1,
                (0, 0) => c.tn += 1,
                (a, b) => return Err(Error::NonBinaryLabel(a.max(b))),
            }
        }
        Ok(c)
    }

    pub fn total(&self) -> usize {
        self.tp + self.fp + self.fn_ + self.tn
    }

    pub fn accuracy(&self) -> f64 {
        if self.total() == 0 {
            return 0.0;
        }
        (self.tp + self.tn) as f64 / self.total() as f64
    }

    /// F1 of the positive class, 0 when precision and recall are both 0.
    pub fn f1(&self) -> f64 {
        let denom = 2 * self.tp + self.fp + self.fn_;
        if self.tp == 0 || denom == 0 {
            0.0
        } else {
            2.0 * self.tp as f64 / denom as f64
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub accuracy: f64,
    pub f1: f64,
}

pub fn classification_metrics(predicted: &[u8], truth: &[u8]) -> Result<Metrics> {
    let c = Confusion::from_labels(predicted, truth)?;
    Ok(Metrics {
        accuracy: c.accuracy(),
        f1: c.f1(),
    })
}
