use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("stream exhausted after {0} steps")]
    StreamExhausted(u64),

    #[error("no feasible example for concept after {attempts} rejection attempts")]
    Infeasible { attempts: usize },

    #[error("row {row}, column {column}: {message}")]
    Parse {
        row: usize,
        column: String,
        message: String,
    },

    #[error("row {row}: unknown label token {token:?}")]
    UnknownLabel { row: usize, token: String },

    #[error("dimension mismatch: expected {expected} features, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("unknown class label {0}")]
    UnknownClass(i64),

    #[error("too few pairs for signed-rank test: need at least {min}, got {got}")]
    TooFewPairs { min: usize, got: usize },

    #[error("sequences differ in length: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("empty averaging window [{start}, {end}]")]
    EmptyWindow { start: u64, end: u64 },

    #[error("mismatched run counts: {0}")]
    RunCountMismatch(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn csv(path: impl Into<PathBuf>, source: csv::Error) -> Self {
        Error::Csv {
            path: path.into(),
            source,
        }
    }
}
