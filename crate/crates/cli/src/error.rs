use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad, missing or unknown configuration; exit code 1.
    #[error("config error: `{key}`: {message}")]
    Config { key: String, message: String },

    /// Command-line usage error; exit code 1.
    #[error("{0}")]
    Usage(String),

    /// Failure inside a simulation; exit code 2.
    #[error("numerical failure: {0}")]
    Numerical(#[from] rfdress_core::Error),

    /// Output could not be written; exit code 2.
    #[error("cannot write {path}: {source}")]
    Output {
        path: String,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        CliError::Config {
            key: key.into(),
            message: message.into(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } | CliError::Usage(_) => 1,
            CliError::Numerical(_) | CliError::Output { .. } => 2,
        }
    }
}
