use thiserror::Error;

/// Errors raised by the numerical routines in this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("non-finite value {value} at t = {at}")]
    NonFinite { at: f64, value: f64 },

    #[error(
        "adaptive quadrature exceeded depth {depth} (best value {value}, error estimate {error_estimate})"
    )]
    MaxDepth {
        depth: usize,
        value: f64,
        error_estimate: f64,
    },

    #[error("argument out of domain: {0}")]
    Domain(String),

    #[error("parse error at column {column}: {message}")]
    Parse { column: usize, message: String },

    #[error("degenerate point: {0}")]
    Degenerate(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
