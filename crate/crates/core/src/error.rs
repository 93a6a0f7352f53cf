use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),
    #[error("matrix is not positive definite (smallest eigenvalue {0:e})")]
    NotPositiveDefinite(f64),
    #[error("matrix is ill-conditioned (condition number {0:e})")]
    IllConditioned(f64),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("cannot normalize a zero vector")]
    ZeroVector,
    #[error("point is not in the interior of the body")]
    NotInterior,
    #[error("point lies outside the body (gauge {0})")]
    OutsideBody(f64),
    #[error("invalid body: {0}")]
    InvalidBody(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("no strictly feasible point for the constraint set")]
    Infeasible,
    #[error("solver stopped after {iterations} iterations with decrement {decrement:e}")]
    NotConverged { iterations: usize, decrement: f64 },
    #[error("increment {value} exceeds its bound {bound} at step {step}")]
    BoundViolation { step: usize, value: f64, bound: f64 },
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("json: {0}")]
    Json(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e.to_string())
    }
}
