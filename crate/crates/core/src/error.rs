//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by geometric construction and evaluation.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("zero normal vector")]
    ZeroNormal,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("unbounded input: the halfspace intersection is not a polytope")]
    UnboundedInput,

    #[error("lower-dimensional input: the intersection has empty interior")]
    LowerDimensional,

    #[error("empty intersection")]
    Empty,

    #[error("argument {0} outside the function's domain")]
    OutOfDomain(f64),

    #[error("hyperplanes are parallel; no trace exists")]
    ParallelPlanes,

    #[error("cell is unbounded; volume function undefined")]
    UnboundedCell,

    #[error("polytope is not dimension-wise equiangular: {0}")]
    NotEquiangular(String),

    #[error("memory budget exceeded: {0} grid cells requested")]
    MemoryBudget(usize),

    #[error("invalid shape specification: {0}")]
    InvalidShapeSpec(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// A short machine-readable tag, stable across message wording changes.
    pub fn code(&self) -> &'static str {
        match self {
            Error::ZeroNormal => "ZeroNormal",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::NumericalFailure(_) => "NumericalFailure",
            Error::UnboundedInput => "UnboundedInput",
            Error::LowerDimensional => "LowerDimensional",
            Error::Empty => "Empty",
            Error::OutOfDomain(_) => "OutOfDomain",
            Error::ParallelPlanes => "ParallelPlanes",
            Error::UnboundedCell => "UnboundedCell",
            Error::NotEquiangular(_) => "NotEquiangular",
            Error::MemoryBudget(_) => "MemoryBudget",
            Error::InvalidShapeSpec(_) => "InvalidShapeSpec",
            Error::InvalidInput(_) => "InvalidInput",
        }
    }

    /// Whether the error indicates bad input (as opposed to a numerical
    /// breakdown while processing valid input).
    pub fn is_validation(&self) -> bool {
        !matches!(self, Error::NumericalFailure(_))
    }
}
