use thiserror::Error;

use crate::Point3;

#[derive(Debug, Error)]
pub enum Error {
    #[error("point {point:?} is inside the singular cutoff r < {cutoff}")]
    Singular { point: Point3, cutoff: f64 },

    #[error("metric is not positive definite at {point:?} (leading minors {minors:?})")]
    NotPositiveDefinite { point: Point3, minors: [f64; 3] },

    #[error("invalid {what}: {reason}")]
    Invalid { what: &'static str, reason: String },

    #[error("conjugate gradients did not converge: residual {residual:.3e} after {iterations} iterations (condition estimate {condition:.3e})")]
    NoConvergence { iterations: usize, residual: f64, condition: f64 },

    #[error("|grad u| = {norm:.3e} is below the gradient floor {floor:.3e} at {point:?}")]
    NearCritical { point: Point3, norm: f64, floor: f64 },

    #[error("level {level} is outside the field range [{min}, {max}]")]
    EmptyLevel { level: f64, min: f64, max: f64 },

    #[error("level curve not transversal to the boundary surface: {0}")]
    NotTransversal(String),

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("schema mismatch: {0}")]
    Schema(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn invalid(what: &'static str, reason: impl Into<String>) -> Self {
        Error::Invalid { what, reason: reason.into() }
    }
}
