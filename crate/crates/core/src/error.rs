use thiserror::Error;

/// Errors surfaced by every fallible operation in the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A caller broke an operation's precondition (wrong dimension, bad index).
    #[error("contract violation: {0}")]
    Contract(String),

    /// Invalid configuration value detected before any computation.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// ODE integration produced a non-finite value.
    #[error("trajectory diverged at step {step}")]
    Diverged { step: usize },

    /// Closed-loop readout produced a non-finite value.
    #[error("prediction diverged at step {step}")]
    PredictionDiverged { step: usize },

    /// Separation in the Lyapunov estimator left the representable range.
    #[error("numeric range exceeded at step {step}: {detail}; decrease the renormalization interval")]
    NumericRange { step: usize, detail: String },

    #[error("degenerate normalization range for column {column}: min = max = {value}")]
    DegenerateRange { column: usize, value: f64 },

    /// Ridge system could not be solved reliably.
    #[error("ridge system is singular or nearly singular (gamma = {gamma}); use a regularization gamma > 0")]
    Singular { gamma: f64 },

    #[error("invalid grid {nx}x{nz}: both dimensions must be at least 2")]
    InvalidGrid { nx: usize, nz: usize },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn contract(msg: impl Into<String>) -> Error {
    Error::Contract(msg.into())
}

pub(crate) fn config(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}
