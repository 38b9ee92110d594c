use thiserror::Error;

/// Errors raised anywhere in the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("degenerate domain: |det| = {det:e} is within 1e-12 of zero")]
    DegenerateDomain { det: f64 },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("non-finite coordinate {value} at index {index}")]
    NonFinite { index: usize, value: f64 },

    #[error("oracle returned {value} at node {node:?}")]
    OracleFailure { node: Vec<f64>, value: String },

    #[error("oracle cannot evaluate this point: {0}")]
    UnsupportedProbe(String),

    #[error("invalid grid: every axis needs at least one node")]
    InvalidGrid,

    #[error("invalid rational {input:?}: {reason}")]
    InvalidRational { input: String, reason: String },

    #[error("division by zero")]
    DivisionByZero,

    #[error("unknown symbol {0}")]
    UnknownSymbol(String),

    #[error("invalid basis: {0}")]
    InvalidBasis(String),

    #[error("invalid window: {0}")]
    InvalidWindow(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("incomplete data: {0}")]
    IncompleteData(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("expression error: {0}")]
    Expression(String),

    #[error("linear solve residual {residual:e} exceeds tolerance")]
    SolveResidual { residual: f64 },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
