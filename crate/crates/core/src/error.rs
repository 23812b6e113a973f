use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("index {index} out of range for length {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    /// Restricted-eigenvalue constant is not positive, so the fast-rate bound does not apply.
    #[error("restricted eigenvalue condition violated (phi = {0})")]
    ReViolated(f64),

    #[error("coordinate descent did not converge after {cycles} cycles (last change {last_change:e})")]
    NotConverged {
        cycles: usize,
        last_change: f64,
        last_iterate: Vec<f64>,
    },

    #[error("active set is rank-degenerate at lambda = {0}")]
    Degenerate(f64),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            msg: msg.into(),
        }
    }
}
