//! Error types shared across the crate.

use std::fmt;

/// Top-level error type.
#[derive(Debug)]
pub enum SizerError {
    /// A caller-supplied argument violated a precondition.
    InvalidArgument(String),
    /// A mathematically invalid input (e.g. non-positive denominator).
    Domain(String),
    /// Configuration file failed validation; the string carries a field path.
    Config(String),
    /// Persisted data (dataset, bundle, trace) could not be parsed.
    Format(String),
    /// Filesystem or subprocess I/O failure.
    Io(String),
    /// A failure attributed to a specific evaluation point.
    Evaluation { index: usize, message: String },
}

impl fmt::Display for SizerError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SizerError::InvalidArgument(m) => write!(f, "invalid argument: {m}"),
            SizerError::Domain(m) => write!(f, "domain error: {m}"),
            SizerError::Config(m) => write!(f, "config error: {m}"),
            SizerError::Format(m) => write!(f, "format error: {m}"),
            SizerError::Io(m) => write!(f, "io error: {m}"),
            SizerError::Evaluation { index, message } => {
                write!(f, "evaluation error at point {index}: {message}")
            }
        }
    }
}

impl std::error::Error for SizerError {}

impl From<std::io::Error> for SizerError {
    fn from(e: std::io::Error) -> Self {
        SizerError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for SizerError {
    fn from(e: serde_json::Error) -> Self {
        SizerError::Format(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, SizerError>;
