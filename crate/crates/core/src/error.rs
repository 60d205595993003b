use thiserror::Error;

/// Errors raised by the numerics, map constructions, suites, and file formats.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not Hermitian (max |M - M^dagger| = {0:e})")]
    NotHermitian(f64),

    #[error("matrix is not positive semidefinite (min eigenvalue {0:e})")]
    NotPsd(f64),

    #[error("matrix is not an orthogonal projector (residual {0:e})")]
    NotProjector(f64),

    #[error("eigensolver did not converge on a {dim}x{dim} matrix")]
    EigenNonConvergence { dim: usize },

    #[error("singular value decomposition did not converge on a {rows}x{cols} matrix")]
    SvdNonConvergence { rows: usize, cols: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("malformed input: {0}")]
    Format(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }

    /// True for errors caused by unreadable or invalid input data, as opposed
    /// to well-formed input that violates a mathematical precondition.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Format(_)
                | Error::Json(_)
                | Error::Io(_)
                | Error::NotSquare { .. }
                | Error::NotHermitian(_)
                | Error::NotPsd(_)
                | Error::NotProjector(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
