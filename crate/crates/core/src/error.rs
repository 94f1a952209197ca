use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// A setting or model parameter is out of its valid range.
    #[error("configuration error: {0}")]
    Config(String),

    /// A call received arguments that violate its preconditions.
    #[error("invalid argument: {0}")]
    Argument(String),

    /// Malformed input file.
    #[error("parse error in {path}, line {line}: {message}")]
    Parse { path: PathBuf, line: usize, message: String },

    #[error("solver did not converge after {iterations} iterations (worst KKT violation {violation:.3e})")]
    NotConverged { iterations: usize, violation: f64 },

    /// A class-pair subproblem failed inside a one-vs-one fit.
    #[error("pair ({class_a}, {class_b}): {source}")]
    Pair {
        class_a: usize,
        class_b: usize,
        #[source]
        source: Box<Error>,
    },

    /// Data that cannot support the requested computation (e.g. zero variance).
    #[error("degenerate data: {0}")]
    Degenerate(String),

    /// Failure inside a named pipeline stage.
    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }

    pub fn in_stage(self, stage: &'static str) -> Self {
        Error::Stage { stage, source: Box::new(self) }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
