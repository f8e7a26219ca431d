use thiserror::Error;

/// Errors raised by index computations.
#[derive(Debug, Error)]
pub enum IndexError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("truncation windows differ: {0}")]
    WindowMismatch(String),

    #[error("operator is singular (smallest singular value {0:e})")]
    Singular(f64),

    #[error("symbol is not invertible at x = {x} (smallest singular value {sigma:e})")]
    NotInvertible { x: f64, sigma: f64 },

    #[error("sampling grid too coarse: phase step {step} between samples {index} and {next}")]
    GridTooCoarse { index: usize, next: usize, step: f64 },

    #[error("{value} is not within {tol:e} of an integer (residual {residual:e})")]
    NonInteger { value: f64, residual: f64, tol: f64 },

    #[error("index did not converge: {0}")]
    NonConvergence(String),

    #[error("quadrature failed: {0}")]
    Quadrature(String),

    #[error("out of range: {0}")]
    Range(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("homotopy leaves the admissible class: {0}")]
    Homotopy(String),

    #[error("edge contamination: {0}")]
    EdgeContamination(String),

    #[error("falsified: {0}")]
    Falsified(String),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl IndexError {
    /// True for failures that reflect a violated mathematical claim rather than
    /// a numerical or usage problem.
    pub fn is_falsification(&self) -> bool {
        matches!(self, IndexError::Falsified(_))
    }
}

pub type Result<T> = std::result::Result<T, IndexError>;
