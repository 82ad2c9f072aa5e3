use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid configuration: {0}")]
    Validation(String),

    #[error("unknown command `{0}`")]
    UnknownCommand(String),

    #[error(transparent)]
    Numeric(#[from] horizon_core::Error),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("cache record {path}: {message}")]
    Cache { path: String, message: String },

    #[error("serialization error: {0}")]
    Serialize(String),
}

impl CliError {
    /// 1 for configuration problems, 2 for numerical failures, 3 for I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse { .. } | CliError::Validation(_) | CliError::UnknownCommand(_) => 1,
            CliError::Numeric(_) => 2,
            CliError::Io(_) | CliError::Cache { .. } | CliError::Serialize(_) => 3,
        }
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Serialize(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Serialize(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
