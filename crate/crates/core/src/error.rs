use thiserror::Error;

/// Errors raised by the numerical routines of this crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("unsupported transform: {0}")]
    UnsupportedTransform(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    /// Adaptive quadrature ran out of panels before reaching the requested tolerance.
    #[error("quadrature tolerance {tolerance:e} not met: error estimate {estimate:e} after {panels} panels")]
    ToleranceNotMet {
        estimate: f64,
        tolerance: f64,
        panels: usize,
    },

    #[error("insufficient resolution: {0}")]
    InsufficientResolution(String),

    #[error("serialization: {0}")]
    Serialization(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn argument<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Argument(msg.into()))
}

pub(crate) fn precondition<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Precondition(msg.into()))
}
