use std::path::PathBuf;

/// Errors produced by the library. CLI-level usage errors live in the
/// binary crate; everything here is a data or state problem.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("duplicate sense id `{id}` at {path}:{line}")]
    DuplicateSenseId {
        path: PathBuf,
        id: String,
        line: usize,
    },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimMismatch { expected: usize, got: usize },

    #[error("empty input sequence")]
    EmptySequence,

    #[error("forward states do not match these parameters/inputs")]
    StaleStates,

    #[error("no training instances: {0}")]
    NoInstances(&'static str),

    #[error("{0}")]
    Metric(String),

    #[error("no description token has a word vector")]
    NoResolvableTokens,

    #[error("bad checkpoint: {0}")]
    Checkpoint(String),

    #[error("unknown sense id `{0}`")]
    UnknownSenseId(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            msg: msg.into(),
        }
    }
}
