use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("signature dimension overflows usize for alphabet {alphabet} and order {order}")]
    Overflow { alphabet: usize, order: usize },

    #[error(
        "signature of alphabet {alphabet} and order {order} needs {required} features, \
         budget is {budget}"
    )]
    BudgetExceeded {
        alphabet: usize,
        order: usize,
        required: usize,
        budget: usize,
    },

    #[error("label {0} is not binary (expected 0 or 1)")]
    NonBinaryLabel(u8),

    #[error("both classes must be present: {0}")]
    SingleClass(String),

    #[error("solver stopped after {passes} passes with KKT violation {violation:e}")]
    NotConverged { passes: usize, violation: f64 },

    #[error("Cholesky factorization failed even with jitter {jitter:e}")]
    Cholesky { jitter: f64 },

    #[error("design matrix is rank deficient (rank {rank} < {columns})")]
    RankDeficient { rank: usize, columns: usize },

    #[error("slope heuristic grid never drives the selected order to 0 (smallest order reached: {min_order})")]
    GridTooSmall { min_order: usize },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: u64,
        message: String,
    },

    #[error("config: {0}")]
    Config(String),

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}

/// Attach a stage name to an error as it propagates out of the orchestrator.
pub(crate) trait StageContext<T> {
    fn stage(self, stage: &'static str) -> Result<T>;
}

impl<T> StageContext<T> for Result<T> {
    fn stage(self, stage: &'static str) -> Result<T> {
        self.map_err(|source| Error::Stage {
            stage,
            source: Box::new(source),
        })
    }
}
