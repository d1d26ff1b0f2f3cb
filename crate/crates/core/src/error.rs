use thiserror::Error;

/// Errors raised by the simulation, training, and capacity routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid network: {0}")]
    InvalidNetwork(String),

    #[error("potential matrix is not positive definite (smallest eigenvalue {min_eigenvalue:e})")]
    NonPositiveDefinitePotential { min_eigenvalue: f64 },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("covariance matrix is not symmetric (max asymmetry {0:e})")]
    NonSymmetricCovariance(f64),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("index {index} out of range for {len} modes")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("input {0} lies outside [-1, 1]")]
    InputOutOfRange(f64),

    #[error("reservoir violates the echo state condition: spectral radius rho(A) = {spectral_radius:.12} >= 1")]
    UnstableReservoir { spectral_radius: f64 },

    #[error("feature matrix would have {columns} columns, above the cap of {cap}")]
    SizeOverflow { columns: usize, cap: usize },

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("non-binary input {0} for a binary task")]
    NonBinaryInput(f64),

    #[error("target sequence has zero energy")]
    ZeroTarget,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
