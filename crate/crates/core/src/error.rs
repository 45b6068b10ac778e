use std::path::PathBuf;

use thiserror::Error;

/// Errors surfaced by the library and the `cg` binary.
#[derive(Debug, Error)]
pub enum Error {
    /// Input that is well-formed but violates a model constraint
    /// (off-grid value, infeasible state, bad proposal, ...).
    #[error("validation error: {0}")]
    Validation(String),

    /// An exponential operation was asked to run beyond its configured cap.
    #[error("scale bound exceeded: {what} needs n <= {cap}, got {n}")]
    ScaleBound { what: &'static str, n: usize, cap: usize },

    #[error("relative welfare undefined: optimal welfare is zero")]
    UndefinedRatio,

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },

    /// A broken internal invariant; always a bug.
    #[error("internal error: {0}")]
    Internal(String),
}

impl Error {
    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, message: impl ToString) -> Self {
        Error::Parse {
            path: path.into(),
            message: message.to_string(),
        }
    }

    /// Process exit code used by the CLI. Unreadable or invalid input maps to
    /// 2, scale-bound violations to 3, internal errors to 1.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Validation(_) | Error::Parse { .. } | Error::UndefinedRatio | Error::Io { .. } => 2,
            Error::ScaleBound { .. } => 3,
            Error::Internal(_) => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
