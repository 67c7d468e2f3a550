use std::path::PathBuf;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("{0}")]
    Runtime(ccdt_core::Error),

    #[error("{0}")]
    PropertyFailure(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Runtime(_) | CliError::PropertyFailure(_) => 3,
            CliError::Io { .. } => 4,
        }
    }
}

/// Errors raised while resolving a config are validation failures.
impl From<ccdt_core::Error> for CliError {
    fn from(e: ccdt_core::Error) -> Self {
        CliError::Config(e.to_string())
    }
}
