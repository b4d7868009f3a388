use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain an operation accepts.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("shape error: {0}")]
    Shape(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("encoding mismatch: {0}")]
    EncodingMismatch(String),

    #[error("unsupported encoding: {0}")]
    UnsupportedEncoding(String),

    /// The problem lacks the terms an operation needs (e.g. no quadratic part).
    #[error("structural error: {0}")]
    Structural(String),

    /// No coefficient bound >= 1 can meet the requested precision.
    #[error("infeasible precision: {0}")]
    Infeasible(String),

    #[error("stalled: {0}")]
    Stalled(String),

    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn shape(msg: impl Into<String>) -> Self {
        Error::Shape(msg.into())
    }

    pub(crate) fn parse(msg: impl Into<String>) -> Self {
        Error::Parse(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Infeasible(_) | Error::Stalled(_) => 3,
            Error::Capacity(_) => 4,
            Error::Io { .. } => 1,
            _ => 2,
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
