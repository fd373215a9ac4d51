//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Bad configuration: unknown keys, missing columns, type mismatches.
    #[error("configuration error: {0}")]
    Config(String),

    /// Input violates a documented precondition or invariant.
    #[error("validation error: {0}")]
    Validation(String),

    /// Non-finite values or other numeric breakdown.
    #[error("numeric error: {0}")]
    Numeric(String),

    /// The RDP accountant could not produce a usable curve.
    #[error("accounting error: {0}")]
    Accounting(String),

    /// σ↔ε calibration failed inside the search bracket.
    #[error("calibration error: {0}")]
    Calibration(String),

    /// FedAvg input mismatch.
    #[error("aggregation error: {0}")]
    Aggregation(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}
