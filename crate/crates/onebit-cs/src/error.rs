use thiserror::Error;

/// Errors produced by instance handling, the solver, and the benchmark
/// harness.
#[derive(Debug, Error)]
pub enum Error {
    /// A caller-supplied argument violates a precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Reading or writing a file failed.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    /// An instance file is syntactically valid JSON but violates the
    /// instance schema; `field` names the offending field.
    #[error("parse error in field `{field}`: {reason}")]
    Parse { field: String, reason: String },

    /// The inner Newton solve could not factor the surrogate Hessian even
    /// after escalating regularization.
    #[error("numerical failure at Newton iteration {iteration}: {reason}")]
    NumericalFailure { iteration: usize, reason: String },

    /// Every coordinate was pruned; no nonzero estimate remains.
    #[error("degenerate solution: all coordinates pruned at outer iteration {iteration}")]
    DegenerateSolution { iteration: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn parse(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Parse {
            field: field.into(),
            reason: reason.into(),
        }
    }
}
