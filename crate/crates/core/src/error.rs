use thiserror::Error;

use crate::algebra::ProjectionKind;

/// Errors raised by the operator-algebra toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("operator is not Hermitian (max entry deviation {0:e})")]
    NotHermitian(f64),

    #[error("operator is not skew-Hermitian (max entry deviation {0:e})")]
    NotSkewHermitian(f64),

    #[error("operator is not unitary (defect {0:e})")]
    NotUnitary(f64),

    #[error("invalid site selection: {0}")]
    InvalidSites(String),

    #[error("invalid block structure: {0}")]
    InvalidBlocks(String),

    #[error("algebra is not a factor (has {0} blocks)")]
    NotFactor(usize),

    #[error("algebra is not collinear: n_J/d_J varies across blocks")]
    NotCollinear,

    #[error("incompatible algebras: {0}")]
    Incompatible(String),

    #[error("wrong projection kind: expected {expected:?}, found {found:?}")]
    WrongKind {
        expected: ProjectionKind,
        found: ProjectionKind,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("serialization failed: {0}")]
    Serde(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
