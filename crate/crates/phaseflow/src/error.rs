use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("{potential}: argument {r} lies outside the open domain ({lo}, {hi})")]
    DomainViolation {
        potential: String,
        r: f64,
        lo: f64,
        hi: f64,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unknown model `{0}`")]
    UnknownModel(String),

    #[error("linear solve failed: {0}")]
    SingularSolve(String),

    #[error("Newton iteration did not converge after {iterations} iterations (residual {residual:e})")]
    NewtonDiverged { iterations: usize, residual: f64 },

    #[error("damping could not keep the iterate inside the domain after {halvings} halvings")]
    DomainExhausted { halvings: usize },

    #[error("oracle failed: {0}")]
    OracleFailed(String),

    #[error("degenerate Jacobian (pivot {pivot:e} at row {row})")]
    DegenerateJacobian { row: usize, pivot: f64 },

    #[error("insufficient decay: {0}")]
    InsufficientDecay(String),

    #[error("insufficient samples: {admitted} admitted, {required} required")]
    InsufficientSamples { admitted: usize, required: usize },

    #[error("configuration mismatch: {0}")]
    ConfigMismatch(String),

    #[error("parse error at line {line}: {message}")]
    ParseError { line: usize, message: String },

    #[error("invalid configuration:\n  {}", .0.join("\n  "))]
    ValidationError(Vec<String>),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
