use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid series `{id}`: {reason}")]
    InvalidSeries { id: String, reason: String },

    #[error("invalid feature matrix: {0}")]
    InvalidMatrix(String),

    #[error("no common dates across inputs; smallest overlap is between `{first}` and `{second}` ({overlap} shared dates)")]
    Alignment {
        first: String,
        second: String,
        overlap: usize,
    },

    #[error("unknown feature id `{0}`")]
    UnknownFeature(String),

    #[error("horizon {horizon} must be smaller than the number of rows ({rows})")]
    HorizonTooLarge { horizon: usize, rows: usize },

    #[error("metric error: {0}")]
    Metric(String),

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("design matrix is rank deficient; refit with a positive ridge_lambda")]
    RankDeficient,

    #[error("R² is undefined: target has zero variance")]
    ZeroVariance,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unknown selection method `{0}`")]
    UnknownMethod(String),

    #[error("too few rows: {rows} left after shrinking, at least {min} required")]
    TooFewRows { rows: usize, min: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{path}: {reason}")]
    Csv { path: PathBuf, reason: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
