use std::path::PathBuf;

/// Errors produced by the unithood library.
#[derive(thiserror::Error, Debug)]
pub enum Error {
    #[error("duplicate document id: {0}")]
    DuplicateDocId(String),

    #[error("invalid phrase query: {0}")]
    InvalidPhrase(String),

    /// Network or response-parse failure; the request may succeed if retried.
    #[error("count request for {query} failed: {message}")]
    Transport { query: String, message: String },

    #[error("count field for {query} is malformed: {message}")]
    CountFormat { query: String, message: String },

    #[error("operation not supported by the {provider} provider: {operation}")]
    Unsupported {
        provider: &'static str,
        operation: &'static str,
    },

    #[error("sample space size is zero")]
    InvalidSampleSpace,

    #[error("index size estimation failed: {0}")]
    Estimation(String),

    #[error("undefined marginal probability (n_x = {n_x}, n_y = {n_y})")]
    UndefinedMarginal { n_x: u64, n_y: u64 },

    #[error("independence ratio undefined: ID(a_y, s) is zero")]
    UndefinedRatio,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("missing gold labels for {} pair(s): {}", .0.len(), .0.join(", "))]
    MissingGold(Vec<String>),

    #[error("duplicate gold label for pair {0}")]
    DuplicateGold(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Whether retrying the same request could succeed.
    pub fn is_retryable(&self) -> bool {
        matches!(self, Error::Transport { .. })
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
