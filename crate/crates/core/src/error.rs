use thiserror::Error;

/// Errors produced by the width, witness, and recovery computations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("zero vector has no norming functional")]
    ZeroVector,

    #[error("invalid operator: {0}")]
    InvalidOperator(String),

    #[error("invalid convex body: {0}")]
    InvalidBody(String),

    #[error("linear program is infeasible")]
    Infeasible,

    #[error("linear program is unbounded")]
    Unbounded,

    #[error("operator is not injective on the subspace (smallest singular value {sigma_min:e})")]
    NotInjective { sigma_min: f64 },

    #[error("wrong regime: {0}")]
    WrongRegime(String),

    #[error("observations are inconsistent with the body")]
    Inconsistent,

    #[error("uncertified value: {0}")]
    Uncertified(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("affine plane does not meet the body")]
    EmptySection,

    #[error("combinatorial budget exceeded: {0}")]
    BudgetExceeded(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
