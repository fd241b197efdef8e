use thiserror::Error;

/// Errors raised by the matrix kernel and the measurement calculus built on it.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("matrix is not positive semidefinite (smallest eigenvalue {min_eigenvalue:e})")]
    NotPositiveSemidefinite { min_eigenvalue: f64 },

    #[error("eigensolver did not converge after {sweeps} sweeps (off-diagonal residual {residual:e})")]
    NoConvergence { sweeps: usize, residual: f64 },

    #[error("vectors are not orthonormal (Gram residual {residual:e})")]
    NotIsometry { residual: f64 },

    #[error("zero vector cannot be normalized")]
    ZeroVector,

    #[error("non-finite matrix entry")]
    NonFinite,

    #[error("invariant `{invariant}` violated (residual {residual:e})")]
    Invariant { invariant: &'static str, residual: f64 },

    #[error("coexistence witness is invalid")]
    InvalidWitness,

    #[error("label error: {0}")]
    Label(String),

    #[error("weight error: {0}")]
    Weight(String),

    #[error("shape error: {0}")]
    Shape(String),

    #[error("Kraus operators are not complete (residual {residual:e})")]
    NotComplete { residual: f64 },

    #[error("observable is not commutative (commutator norm {residual:e})")]
    NotCommutative { residual: f64 },

    #[error("measurement model is not normal: {0}")]
    NotNormal(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn dim_err(what: impl Into<String>) -> Error {
    Error::Dimension(what.into())
}
