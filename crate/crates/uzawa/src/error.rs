//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{context}: dimension mismatch (expected {expected}, found {found})")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("matrix must be square, got {n_rows}x{n_cols}")]
    NotSquare { n_rows: usize, n_cols: usize },

    #[error("invalid matrix structure: {0}")]
    InvalidStructure(String),

    #[error("{context}: matrix is not symmetric within tolerance")]
    NotSymmetric { context: &'static str },

    #[error("matrix is not positive definite (pivot {pivot})")]
    NotPositiveDefinite { pivot: usize },

    #[error("singular matrix: no usable pivot for column {pivot}")]
    Singular { pivot: usize },

    #[error("zero diagonal entry in row {row}")]
    ZeroDiagonal { row: usize },

    #[error("dense workspace limit exceeded: dimension {dim} > cap {cap}")]
    DenseCapExceeded { dim: usize, cap: usize },

    #[error("operator not positive on this vector: {context}")]
    OperatorNotPositive { context: &'static str },

    #[error("breakdown at iteration {iteration}: {source}")]
    Breakdown {
        iteration: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("did not converge: {0}")]
    NoConvergence(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Wrap a step-level failure with the iteration at which it occurred.
    pub fn at_iteration(self, iteration: usize) -> Error {
        Error::Breakdown {
            iteration,
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
