//! Design matrices: truncated signatures of the time-augmented paths followed
//! by the scalar covariates, one row per sample.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::Result;
use crate::harness::Dataset;
use crate::sigcore::{sig_dim, signature_with_budget, AugmentedPath, GradedSignature, DEFAULT_FEATURE_BUDGET};

/// Paths and scalars of a dataset, ready to be expanded at any order.
#[derive(Debug, Clone)]
pub struct SignatureDesign {
    paths: Vec<AugmentedPath>,
    scalars: Vec<Vec<f64>>,
    labels: Vec<u8>,
    alphabet: usize,
    budget: usize,
}

impl SignatureDesign {
    pub fn new(dataset: &Dataset) -> Result<Self> {
        Ok(Self {
            paths: dataset.augmented_paths()?,
            scalars: dataset.samples().iter().map(|s| s.scalars.clone()).collect(),
            labels: dataset.labels(),
            alphabet: dataset.alphabet(),
            budget: DEFAULT_FEATURE_BUDGET,
        })
    }

    pub fn with_budget(mut self, budget: usize) -> Self {
        self.budget = budget;
        self
    }

    pub fn budget(&self) -> usize {
        self.budget
    }

    pub fn alphabet(&self) -> usize {
        self.alphabet
    }

    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }

    pub fn q(&self) -> usize {
        self.scalars.first().map_or(0, Vec::len)
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    /// Signatures of every path at `order`, in sample order.
    pub fn signatures(&self, order: usize) -> Result<Vec<GradedSignature>> {
        self.paths
            .par_iter()
            .map(|p| signature_with_budget(p, order, self.budget))
            .collect()
    }

    /// Rows `[S_order(path), z]`, taking the order-`order` prefix of
    /// `signatures` (which may have been computed at a higher order).
    pub fn assemble(&self, signatures: &[GradedSignature], order: usize) -> Result<DMatrix<f64>> {
        let sig_len = sig_dim(self.alphabet, order)?;
        let q = self.q();
        let n = self.paths.len();
        Ok(DMatrix::from_fn(n, sig_len + q, |i, j| {
            if j < sig_len {
                signatures[i].as_slice()[j]
            } else {
                self.scalars[i][j - sig_len]
            }
        }))
    }

    /// Design matrix at `order` with scalars appended.
    pub fn design(&self, order: usize) -> Result<DMatrix<f64>> {
        let sigs = self.signatures(order)?;
        self.assemble(&sigs, order)
    }
}

/// Signature-plus-scalar design matrix of a dataset at `order`.
pub fn signature_features(dataset: &Dataset, order: usize) -> Result<DMatrix<f64>> {
    SignatureDesign::new(dataset)?.design(order)
}

/// Rows of a dataset picked by index.
pub(crate) fn select_rows(x: &DMatrix<f64>, rows: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), x.ncols(), |i, j| x[(rows[i], j)])
}

pub(crate) fn select_labels(labels: &[u8], rows: &[usize]) -> Vec<u8> {
    rows.iter().map(|&i| labels[i]).collect()
}
