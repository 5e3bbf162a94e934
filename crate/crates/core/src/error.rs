use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("schema error: {0}")]
    Schema(String),

    #[error("type mismatch in {relation}.{column} at row {row}: {detail}")]
    TypeMismatch {
        relation: String,
        column: String,
        row: usize,
        detail: String,
    },

    #[error("invalid query: {0}")]
    Query(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    /// Exponential or otherwise capped work was refused.
    #[error("refused: {0}")]
    Cap(String),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }

    /// Process exit code used by the CLI: 3 for cap refusals, 2 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Cap(_) => 3,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
