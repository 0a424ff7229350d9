//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("evaluation error: {0}")]
    Eval(String),
    #[error("operator is not Hermitian")]
    NonHermitian,
    #[error("matrix is not orthogonal (deviation {0:e})")]
    NonOrthogonal(f64),
    #[error("matrix is not unitary (deviation {0:e})")]
    NonUnitary(f64),
    #[error("operator set does not commute (deviation {0:e})")]
    NonCommuting(f64),
    #[error("order reduction failed; top-order residual: {residual}")]
    Reduction { residual: String },
    #[error("x-degree {0} remains above 2")]
    DegreeTooHigh(u32),
    #[error("contraction count {j} exceeds order {k}")]
    Contraction { j: usize, k: usize },
    #[error("no Waring decomposition available for {0}")]
    NoWaring(String),
    #[error("unknown gate: {0}")]
    UnknownGate(String),
    #[error("invalid gate: {0}")]
    InvalidGate(String),
    #[error("missing coefficient for subset {0:?}")]
    MissingCoefficient(Vec<usize>),
    #[error("plan has not been verified")]
    UnverifiedPlan,
    #[error("verification failed: {0}")]
    Verification(String),
    #[error("schema error: {0}")]
    Schema(String),
}

pub type Result<T> = std::result::Result<T, Error>;
