use thiserror::Error;

/// Errors raised by the exact-arithmetic and classification routines.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not symmetric at ({row}, {col})")]
    NotSymmetric { row: usize, col: usize },

    #[error("matrix is singular")]
    Singular,

    #[error("matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("matrix is not positive semidefinite")]
    NotPositiveSemidefinite,

    #[error("LDL factorization failed: zero pivot at {pivot} with nonzero residual column")]
    NotFactorizable { pivot: usize },

    #[error("negative entry at ({row}, {col}) where a nonnegative matrix is required")]
    NegativeEntry { row: usize, col: usize },

    #[error("parts sum to {sum}, expected {expected}")]
    PartsMismatch { sum: u64, expected: u64 },

    #[error("split index {k} is outside 1..={max}")]
    InvalidSplit { k: usize, max: usize },

    #[error("dimension {d} exceeds the cap of {cap}")]
    DimensionTooLarge { d: usize, cap: usize },

    #[error("invalid certificate: {0}")]
    InvalidCertificate(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
