//! Error type shared by every module.

use thiserror::Error;

/// Failure modes, grouped by the exit code the CLI maps them to.
#[derive(Debug, Error)]
pub enum FracError {
    /// Invalid parameters or configuration (exit code 2).
    #[error("invalid configuration: {0}")]
    Config(String),

    /// Input outside the mathematical domain of an operation (exit code 2).
    #[error("domain error: {0}")]
    Domain(String),

    /// A verified quantity missed its tolerance (exit code 3).
    #[error("tolerance breach in {check}: measured {measured:.3e} > tolerance {tolerance:.3e}")]
    Tolerance { check: String, measured: f64, tolerance: f64 },

    /// An iterative method or quadrature did not converge (exit code 4).
    #[error("non-convergence in {context}: {detail}")]
    NonConvergence { context: String, detail: String },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("format error: {0}")]
    Format(String),
}

impl FracError {
    pub fn config(msg: impl Into<String>) -> Self {
        FracError::Config(msg.into())
    }

    pub fn domain(msg: impl Into<String>) -> Self {
        FracError::Domain(msg.into())
    }

    pub fn non_convergence(context: impl Into<String>, detail: impl Into<String>) -> Self {
        FracError::NonConvergence { context: context.into(), detail: detail.into() }
    }

    /// Process exit code for this error class.
    pub fn exit_code(&self) -> i32 {
        match self {
            FracError::Config(_) | FracError::Domain(_) | FracError::Format(_) => 2,
            FracError::Io(_) => 2,
            FracError::Tolerance { .. } => 3,
            FracError::NonConvergence { .. } => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, FracError>;
