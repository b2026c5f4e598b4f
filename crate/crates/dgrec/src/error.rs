//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("empty dataset: {0}")]
    EmptyDataset(String),

    #[error("k-core eliminates all data (k={0})")]
    KCoreEmpty(usize),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("element {0} outside ground set of size {1}")]
    OutsideGround(usize, usize),

    #[error("ground set of size {0} too large for exhaustive search (limit {1})")]
    GroundTooLarge(usize, usize),

    #[error("user {0} has interacted with every item; cannot sample negatives")]
    NoNegativeCandidates(u32),

    #[error("non-finite loss at epoch {epoch}, batch {batch}: {value}")]
    Divergence {
        epoch: usize,
        batch: usize,
        value: f64,
    },

    #[error("no evaluable users (every user has an empty test set)")]
    NoEvaluableUsers,

    #[error("malformed checkpoint: {0}")]
    Checkpoint(String),
}

impl Error {
    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn parse(path: impl Into<String>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }
}
