//! Error types shared across the crate.

use thiserror::Error;

/// Errors raised by the exact operator algebra.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlgebraError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("polynomial degree {degree} exceeds operator truncation {trunc}")]
    DegreeExceedsTruncation { degree: u32, trunc: u32 },
    #[error("series has zero constant term and cannot be inverted")]
    ZeroConstantTerm,
    #[error("division by zero scalar")]
    DivisionByZero,
    #[error("dimension must be at least 2, got {0}")]
    DegenerateDimension(usize),
    #[error("shift operator requires the sqrt(1-B) realization")]
    ShiftRequiresSqrt,
    #[error("invalid scalar literal {0:?}")]
    InvalidScalar(String),
    #[error("custom realization series must start with 1")]
    BadBoundaryCondition,
}

/// Errors raised by the floating-point momentum machinery.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum FlowError {
    #[error("momentum outside deformation domain: radicand {radicand} < 0")]
    Domain { radicand: f64 },
    #[error("Newton iteration did not converge after {iterations} steps (residual {residual})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
}

/// Syntax error with source position, produced by the expression parser.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("syntax error at line {line}, col {col}: expected {expected}")]
pub struct SyntaxError {
    pub line: usize,
    pub col: usize,
    pub expected: String,
}

/// Errors raised when evaluating a parsed expression against a realization.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("index {index} out of range for dimension {n}")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("cannot multiply a polynomial by an operator on the right")]
    PolynomialTimesOperator,
    #[error("commutator arguments must be operators")]
    CommutatorOfPolynomial,
    #[error("cannot add an operator and a polynomial")]
    MixedAddition,
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

/// Configuration validation errors.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("dimension must be at least 2, got {0}")]
    BadDimension(usize),
    #[error("expected {expected} components for `a`, got {got}")]
    BadCovectorLength { expected: usize, got: usize },
    #[error("invalid rational {field}: {text:?}")]
    BadRational { field: String, text: String },
    #[error("truncation {trunc} must be at least max_degree {max_degree}")]
    TruncationTooSmall { trunc: u32, max_degree: u32 },
    #[error("series order must be at least 2, got {0}")]
    SeriesOrderTooSmall(u32),
    #[error("custom f series must start with coefficient 1")]
    BadFSeries,
    #[error("unknown realization kind {0:?}")]
    UnknownFKind(String),
    #[error("io error: {0}")]
    Io(String),
    #[error("json error: {0}")]
    Json(String),
}
