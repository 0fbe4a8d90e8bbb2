//! Error type shared across the crate.

use thiserror::Error;

/// Errors produced by problem construction, simulation and solvers.
#[derive(Debug, Error)]
pub enum Error {
    /// A site or qubit index outside the valid range.
    #[error("index {index} out of range for {len} elements")]
    OutOfRange { index: usize, len: usize },

    /// A value outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// An invalid or inconsistent configuration value.
    #[error("configuration error: {0}")]
    Config(String),

    /// Mismatched vector or matrix dimensions.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    /// A request beyond what the implementation supports (problem too large,
    /// encoding capacity exceeded, unsupported measurement basis).
    #[error("capability error: {0}")]
    Capability(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
