//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u64),

    /// A mathematical precondition was violated (zero has no inverse, negative
    /// argument to a one-sided function, residue out of range, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// Structurally invalid configuration (checkpoint count out of range,
    /// empty trial count, malformed polynomial coefficients, ...).
    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    /// A resource guard refused the request; the caller can retry with a
    /// smaller instance or a raised limit.
    #[error("resource limit: {0}")]
    ResourceLimit(String),

    /// A quadrature loop failed to reach its target accuracy.
    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    /// A value left the representable floating-point range. The message
    /// carries the log-scale value so callers can keep working in log space.
    #[error("overflow: {0}")]
    Overflow(String),

    #[error("cache: {0}")]
    Cache(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
