//! Library-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("matrix is not Hermitian (max asymmetry {max_dev:.3e})")]
    NotHermitian { max_dev: f64 },

    #[error("not a valid density operator: {0}")]
    NotDensity(String),

    #[error("not a valid Choi matrix: {0}")]
    NotChoi(String),

    #[error("Kraus completeness violated (deviation {max_dev:.3e})")]
    KrausIncomplete { max_dev: f64 },

    #[error("dimension limit exceeded: requires dimension {required}, limit {limit}")]
    DimensionLimit { required: usize, limit: usize },

    #[error("cost kind `{0}` does not supply a gradient")]
    NoGradient(&'static str),

    #[error("SDP solver failed: {message} (duality gap {gap:.3e} after {iterations} Newton steps)")]
    SdpFailure {
        message: String,
        gap: f64,
        iterations: usize,
    },

    #[error("did not converge: {0}")]
    NonConvergence(String),
}
