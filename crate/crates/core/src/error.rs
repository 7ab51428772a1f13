use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("variable index {index} out of range (dataset has {columns} columns)")]
    VariableOutOfRange { index: usize, columns: usize },

    #[error("operator `{0}` is not in the operator set")]
    UnknownOperator(String),

    #[error("parse error at byte {offset}: expected {expected}")]
    Parse { offset: usize, expected: String },

    #[error("empty dataset")]
    EmptyDataset,

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid data: {0}")]
    Data(String),

    #[error("output dimension {dim}: {source}")]
    Dimension {
        dim: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            message: message.into(),
        }
    }

    /// True for errors caused by the caller's configuration rather than the data.
    pub fn is_config(&self) -> bool {
        match self {
            Error::Config(_) | Error::UnknownOperator(_) => true,
            Error::Dimension { source, .. } => source.is_config(),
            _ => false,
        }
    }
}
