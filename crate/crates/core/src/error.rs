use thiserror::Error;

/// Errors raised by the lattice, Gaussian, coding and channel routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("generator matrix is rank deficient")]
    RankDeficient,
    #[error("real dimension {dim} exceeds the enumeration cap {cap}")]
    DimensionTooLarge { dim: usize, cap: usize },
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("theta truncation failed: value in [{lower}, {upper}] after {points} points")]
    Truncation { lower: f64, upper: f64, points: usize },
    #[error("degenerate Gaussian spread: {0}")]
    DegenerateSpread(String),
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("unsupported shape for decomposition: {0}")]
    UnsupportedShape(String),
    #[error("channel matrix is singular (condition number {0:e})")]
    SingularChannel(f64),
    #[error("delta too large: {0}")]
    DeltaTooLarge(String),
    #[error("index {index} out of range (size {size})")]
    IndexOutOfRange { index: u64, size: u64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    /// Numerical failures (as opposed to bad input or configuration).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::RankDeficient
                | Error::DimensionTooLarge { .. }
                | Error::Truncation { .. }
                | Error::DegenerateSpread(_)
                | Error::SingularChannel(_)
                | Error::PreconditionViolated(_)
                | Error::DeltaTooLarge(_)
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
