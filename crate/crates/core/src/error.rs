use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed input text; `line` is 1-based.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("unsupported keyword `{keyword}` at line {line}")]
    UnsupportedKeyword { keyword: String, line: usize },

    /// Input is syntactically fine but structurally inconsistent
    /// (dimension mismatch, malformed model, ...).
    #[error("structural error: {0}")]
    Structure(String),

    /// An argument is outside the operation's domain.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("instance has {n} vertices, backend capacity is {cap}")]
    Capacity { n: usize, cap: usize },

    #[error("backend error: {0}")]
    Backend(String),

    /// A solver returned something that violates the model, i.e. a bug.
    #[error("integrity error: {0}")]
    Integrity(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn structure(msg: impl Into<String>) -> Self {
        Error::Structure(msg.into())
    }

    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: msg.into(),
        }
    }
}
