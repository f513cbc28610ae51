use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("matrix is singular to working precision (pivot {pivot:e}, scale {scale:e})")]
    SingularMatrix { pivot: f64, scale: f64 },

    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },

    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdentifier { name: String, offset: usize },

    #[error("variable `{name}` at byte {offset} exceeds chart dimension {dim}")]
    VariableOutOfRange { name: String, offset: usize, dim: usize },

    #[error("domain error evaluating {what} at {point:?}")]
    EvalDomain { what: String, point: Vec<f64> },

    #[error("differential of the projection drops rank at {point:?}")]
    RankDrop { point: Vec<f64> },

    #[error("horizontal part of the covariant derivative is not projectable near {base_point:?} (spread {spread:e})")]
    ProjectabilityViolation { base_point: Vec<f64>, spread: f64 },

    #[error("trajectory left the chart box at t = {t}")]
    BoundaryExit { t: f64 },

    #[error("derivative order budget exceeded: need {needed}, at most {available} available")]
    OrderBudget { needed: usize, available: usize },
}

impl Error {
    /// Errors that only invalidate a single sample point.
    pub fn is_point_incident(&self) -> bool {
        matches!(
            self,
            Error::EvalDomain { .. } | Error::SingularMatrix { .. } | Error::RankDrop { .. }
        )
    }
}
