use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("constellation of 2^{n} points exceeds the configured limit of 2^{limit}")]
    Capacity { n: usize, limit: usize },

    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),

    #[error("invalid channel: {0}")]
    InvalidChannel(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("criterion kind mismatch: expected {expected}, got {actual}")]
    KindMismatch {
        expected: &'static str,
        actual: &'static str,
    },

    #[error("invalid generator: {0}")]
    InvalidGenerator(String),

    #[error("unknown registry id `{0}`")]
    UnknownMatrix(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
