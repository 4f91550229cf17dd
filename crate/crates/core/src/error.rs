use thiserror::Error;

/// Errors raised by the forecasting library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("series {id:?} is too short: {len} points, need at least {min}")]
    SeriesTooShort { id: String, len: usize, min: usize },

    #[error("train/test split leaves no test points (len {len}, train {train})")]
    EmptyTestWindow { len: usize, train: usize },

    #[error("degenerate variance: {0}")]
    DegenerateVariance(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("{0}")]
    Data(String),
}

pub type Result<T> = std::result::Result<T, Error>;
