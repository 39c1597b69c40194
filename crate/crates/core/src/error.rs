use thiserror::Error;

/// Errors raised when an input violates a type invariant or an operation's
/// precondition.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("row {row} has {found} entries, expected {expected}")]
    RaggedRow {
        row: usize,
        expected: usize,
        found: usize,
    },

    #[error("matrix is not Hermitian (entry ({row}, {col}) deviates by {deviation:e})")]
    NotHermitian {
        row: usize,
        col: usize,
        deviation: f64,
    },

    #[error("operator is not positive semi-definite (minimum eigenvalue {min_eigenvalue:e})")]
    NotPositive { min_eigenvalue: f64 },

    #[error("trace is {trace}, expected 1")]
    TraceNotOne { trace: f64 },

    #[error("entries sum to {sum}, expected 1")]
    NotNormalized { sum: f64 },

    #[error("entry {index} is {value}, outside [0, 1]")]
    EntryOutOfRange { index: usize, value: f64 },

    #[error("values are not in non-increasing order at index {index}")]
    Unsorted { index: usize },

    #[error("{name} = {value} is outside its domain")]
    OutOfDomain { name: &'static str, value: f64 },

    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("dimension {dim} does not factor as {dim_a} x {dim_b}")]
    FactorizationMismatch {
        dim: usize,
        dim_a: usize,
        dim_b: usize,
    },

    #[error("trace distance {t} is outside the bound's regime [0, 1/(2e)]")]
    OutsideBoundRegime { t: f64 },

    #[error("decomposition does not reproduce the state (max deviation {deviation:e})")]
    DecompositionMismatch { deviation: f64 },

    #[error("component {index} of the decomposition is not a pure state")]
    NotPure { index: usize },

    #[error("expected {expected} outcomes, found {found}")]
    OutcomeCount { expected: usize, found: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
