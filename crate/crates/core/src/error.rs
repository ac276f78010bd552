use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid region: {0}")]
    InvalidRegion(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("{op} is not supported for {region}")]
    Unsupported { op: &'static str, region: String },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("site count {sites} exceeds the dense eigensolve limit {limit}")]
    TooManySites { sites: usize, limit: usize },

    #[error("matrix is not symmetric: |A - A^T| = {deviation:e}")]
    NotSymmetric { deviation: f64 },

    #[error("eigenvalue {value:e} lies outside [0, 1] beyond tolerance")]
    EigenvalueOutOfRange { value: f64 },

    #[error("eigensolver did not converge")]
    EigensolverFailed,

    #[error("enumeration of {count} product eigenvalues exceeds cap {cap}; set a drop threshold")]
    EnumerationTooLarge { count: u128, cap: u128 },

    #[error("integrand diverges: {0}")]
    DivergentIntegrand(String),

    #[error("quadrature did not converge: error estimate {estimate:e} > tolerance {tol:e}")]
    QuadratureFailed { estimate: f64, tol: f64 },

    #[error("fit failed: {0}")]
    FitFailed(String),

    #[error("L = {scale} lies outside the resolvable window [{min}, {max}]")]
    WindowViolation { scale: f64, min: f64, max: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
