use thiserror::Error;

/// Errors from the dense linear-algebra kit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum NumError {
    #[error("{op}: dimension mismatch ({left} vs {right})")]
    DimensionMismatch { op: &'static str, left: usize, right: usize },
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("{0}: empty input")]
    Empty(&'static str),
    #[error("{op} did not converge after {iterations} iterations")]
    NoConvergence { op: &'static str, iterations: usize },
}

/// Errors raised while building or evaluating problems.
#[derive(Debug, Error)]
pub enum ProblemError {
    #[error("unknown problem family `{0}`")]
    UnknownFamily(String),
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error(transparent)]
    Num(#[from] NumError),
    #[error("problem file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
