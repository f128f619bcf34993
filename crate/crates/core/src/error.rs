use thiserror::Error;

/// Errors produced by the numerical pipeline and the report layer.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("solution blew up (|u|+|v| = {magnitude:.3e}) at r = {at:.6}")]
    OverflowBlowUp { at: f64, magnitude: f64 },

    #[error("no bracket found: {0}")]
    NoBracket(String),

    #[error("iteration did not converge: {0}")]
    NoConverge(String),

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("exact zero pivot in symmetric factorization at block {index}")]
    SingularPivot { index: usize },

    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),

    #[error("mesh too coarse: {0}")]
    MeshTooCoarse(String),

    #[error("doubling iteration exceeded {limit} steps")]
    NonTermination { limit: usize },

    #[error("ode integration failed: {0}")]
    Ode(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
