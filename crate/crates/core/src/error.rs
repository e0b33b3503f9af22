use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("dimension mismatch: {0}")]
    Mismatch(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("subgroup closure exceeds {limit} elements")]
    ClosureBound { limit: usize },

    #[error("size bound exceeded: {0}")]
    SizeBound(String),

    #[error("not abelian: {0}")]
    NotAbelian(String),

    #[error("subgroup of size {size} is not maximal abelian (expected {expected})")]
    NotMaximal { size: usize, expected: usize },

    #[error("numerical ambiguity: {0}")]
    Ambiguous(String),

    #[error("no convergence: {0}")]
    NonConvergence(String),

    #[error("operator lies outside the algebra (residual {residual:e})")]
    OutsideAlgebra { residual: f64 },

    #[error("map is not an isometry (deviation {deviation:e})")]
    NotIsometry { deviation: f64 },

    #[error("not a density operator: {0}")]
    NotState(String),

    #[error("operators do not commute or are not normal (deviation {deviation:e})")]
    NotCommuting { deviation: f64 },

    #[error("Kraus operators are not trace preserving (deviation {deviation:e})")]
    NotTracePreserving { deviation: f64 },

    #[error("evaluation routes disagree: {0}")]
    RouteDisagreement(String),

    #[error("check failed: {0}")]
    CheckFailed(String),
}

pub type Result<T> = std::result::Result<T, Error>;
