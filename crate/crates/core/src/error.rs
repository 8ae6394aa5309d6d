use thiserror::Error;

/// Errors produced by channel construction, the measures and the oracles.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum LeakageError {
    #[error("invalid entry {value} at row {row}, column {col}")]
    InvalidEntry { row: usize, col: usize, value: f64 },

    #[error("row {row} sums to {sum}, which is outside the tolerance {tolerance}")]
    NotStochastic { row: usize, sum: f64, tolerance: f64 },

    #[error("shape error: {0}")]
    ShapeError(String),

    #[error("invalid order: {0}")]
    InvalidOrder(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for LeakageError {
    fn from(err: std::io::Error) -> Self {
        LeakageError::Io(err.to_string())
    }
}

pub type Result<T> = std::result::Result<T, LeakageError>;
