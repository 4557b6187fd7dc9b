//! Binary classification of samples that carry functional channels and
//! scalar covariates, via truncated path signatures and an L1-penalized
//! logistic regression whose truncation order is selected by a penalized
//! empirical risk.
//!
//! - [`sigcore`]: paths, time augmentation and truncated signatures.
//! - [`linear_model`]: the lasso logistic solver.
//! - [`selection`]: order selection, penalty calibration and `λ` tuning.
//! - [`synth`]: synthetic scenarios with irregular sampling.
//! - [`baselines`]: B-spline, Fourier and FPCA classifiers.
//! - [`harness`]: datasets, files, the end-to-end pipeline and experiments.
//!
//! The guide in `book/` walks through each part with runnable examples.

// `!(x >= 0.0)` is used on purpose: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baselines;
pub mod error;
pub mod features;
pub mod harness;
pub mod linear_model;
pub mod rng;
pub mod selection;
pub mod sigcore;
pub mod synth;

pub use error::{Error, Result};

// keeps the guide's snippets compiling and passing
#[cfg(doctest)]
mod guide {
    #[doc = include_str!("../../../book/src/introduction.md")]
    struct Introduction;
    #[doc = include_str!("../../../book/src/signatures.md")]
    struct Signatures;
    #[doc = include_str!("../../../book/src/model.md")]
    struct Model;
    #[doc = include_str!("../../../book/src/selection.md")]
    struct Selection;
    #[doc = include_str!("../../../book/src/baselines.md")]
    struct Baselines;
    #[doc = include_str!("../../../book/src/experiments.md")]
    struct Experiments;
}
