use thiserror::Error;

/// Errors raised by the numerical routines and the command-line front end.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The arguments are valid but the evaluation strategy does not cover them.
    #[error("unsupported domain: {0}")]
    UnsupportedDomain(String),

    /// Adaptive quadrature hit its subdivision limit before meeting tolerance.
    #[error(
        "quadrature did not converge after {subdivisions} subdivisions \
         (estimate {estimate:e}, error estimate {err_estimate:e})"
    )]
    Convergence {
        estimate: f64,
        err_estimate: f64,
        subdivisions: usize,
    },

    /// An object was used in a state that does not support the operation.
    #[error("invalid state: {0}")]
    State(String),

    /// Input records or configuration failed validation.
    #[error("validation error: {0}")]
    Validation(String),

    /// Input could not be parsed.
    #[error("parse error: {0}")]
    Parse(String),

    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
