//! Error type shared by all modules.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CoreError {
    #[error("period must be positive, got T = {0}")]
    NonpositivePeriod(f64),

    #[error("mismatched discretization: expected N = {expected}, got N = {got}")]
    MismatchedDiscretization { expected: usize, got: usize },

    #[error("center of the Lie algebra is trivial; unit lattice is empty")]
    EmptyLattice,

    #[error("weights ({0}, {1}) must be coprime positive integers")]
    NonCoprimeWeights(u32, u32),

    #[error("point projects outside the chart atlas (model bug): {0}")]
    ChartNotFound(String),

    #[error("moment constraint violated: |A - Z| = {0:.3e}")]
    MomentConstraintViolated(f64),

    #[error("trajectory closure violated: |x(T) - g x(0)| = {0:.3e}")]
    ClosureViolated(f64),

    #[error("configuration is not critical: gradient norm {0:.3e} above threshold {1:.3e}")]
    NotCritical(f64, f64),

    #[error("Newton system is singular or did not improve the residual")]
    SingularJacobian,

    #[error("constraint drift during integration: |c(q)| = {0:.3e}")]
    ConstraintDrift(f64),

    #[error("path class rejected: {0}")]
    InvalidPathClass(String),

    #[error("invalid model or parameters: {0}")]
    InvalidModel(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, CoreError>;
