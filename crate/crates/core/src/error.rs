use thiserror::Error;

/// Errors raised by the solver and the diagnostics built on it.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("degenerate field: {0}")]
    DegenerateField(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("numerical blowup at step {step} (t = {time}): {reason}")]
    NumericalBlowup { step: usize, time: f64, reason: String },

    #[error("no convergence after {steps} steps (relative residual {residual:.3e})")]
    Convergence { steps: usize, residual: f64 },

    #[error("out of range: {0}")]
    Range(String),

    #[error("detection failed: {0}")]
    Detection(String),
}

pub type Result<T> = std::result::Result<T, Error>;
