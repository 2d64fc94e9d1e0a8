//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed textual input (sequence expression, operator file, record file).
    #[error("parse error: {0}")]
    Parse(String),

    /// A numeric routine could not meet its contract (divergence, domain error).
    #[error("numeric error: {0}")]
    Numeric(String),

    /// A series truncation order was too low for the requested accuracy.
    #[error("insufficient truncation order: {0}")]
    Truncation(String),

    /// Working precision exhausted (e.g. PSLQ residual plateau).
    #[error("precision too low: {0}")]
    Precision(String),

    /// A value could not be recognized as an exact constant.
    #[error("recognition failed: {0}")]
    Recognition(String),

    /// Invalid argument or inconsistent configuration.
    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
