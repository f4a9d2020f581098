use thiserror::Error;

/// Errors produced by this crate.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument is outside the valid range for the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The number of candidate models exceeds the exhaustive-search cap.
    #[error("candidate count {count} exceeds budget cap {cap}; use stochastic mode")]
    BudgetExceeded { count: u128, cap: u128 },

    /// A precondition on the inputs was violated.
    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
