use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("empty operator (dimension 0)")]
    Empty,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("operator is not Hermitian (asymmetry {asymmetry:e} exceeds {tol:e})")]
    NotHermitian { asymmetry: f64, tol: f64 },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("eigensolver did not converge (dimension {0})")]
    NoConvergence(usize),

    #[error("not a density matrix: {0}")]
    NotAState(String),

    #[error("commutator equation has no solution: {0}")]
    Unsolvable(String),

    #[error("ill-conditioned evaluation: {0}")]
    Conditioning(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
