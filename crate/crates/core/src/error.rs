use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: malformed header: {reason}")]
    Header { path: PathBuf, reason: String },

    #[error("{path}: row {row}: {reason}")]
    Row {
        path: PathBuf,
        row: usize,
        reason: String,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("invalid config: {0}")]
    Config(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("regularized normal equations are singular (lambda2 = {lambda2})")]
    Singular { lambda2: f64 },

    #[error("subset {subset} has {found} images, fewer than the minimum {min}")]
    SubsetTooSmall {
        subset: String,
        found: usize,
        min: usize,
    },

    #[error("constant input: rank correlation undefined")]
    ConstantInput,

    #[error("bootstrap: gave up after {0} degenerate resamples")]
    DegenerateResamples(usize),

    #[error("training diverged at epoch {epoch}: loss = {loss}")]
    Diverged { epoch: usize, loss: f64 },

    #[error("case-control: {0}")]
    CaseControl(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn row(path: impl Into<PathBuf>, row: usize, reason: impl Into<String>) -> Self {
        Error::Row {
            path: path.into(),
            row,
            reason: reason.into(),
        }
    }
}
