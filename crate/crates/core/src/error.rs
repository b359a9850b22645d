use thiserror::Error;

/// Errors raised by the relay laboratory.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum RelayError {
    #[error("matrix is not Hermitian (asymmetry {asymmetry:.3e} exceeds tolerance)")]
    NonHermitianInput { asymmetry: f64 },

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    /// A matrix that must be inverted is numerically singular. The Monte Carlo
    /// engine treats this as a degenerate draw and resamples.
    #[error("singular system while inverting {what} (condition number {condition:.3e})")]
    SingularSystem { what: &'static str, condition: f64 },

    #[error("invalid antenna configuration: {0}")]
    InvalidDims(String),

    #[error("argument out of range: {0}")]
    OutOfRange(String),

    #[error("insufficient data for slope fit: {admissible} admissible point(s), need at least 2")]
    InsufficientData { admissible: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, RelayError>;
