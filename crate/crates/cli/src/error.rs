use std::path::PathBuf;

use reclab::ErrorKind;
use thiserror::Error;

pub type CliResult<T> = Result<T, CliError>;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] reclab::Error),
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Invariant(String),
    #[error("{0}")]
    Limit(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) => match e.kind() {
                ErrorKind::Validation => 2,
                ErrorKind::BackendLimit => 3,
                ErrorKind::Invariant => 4,
            },
            CliError::Usage(_) | CliError::Io { .. } => 2,
            CliError::Limit(_) => 3,
            CliError::Invariant(_) => 4,
        }
    }

    pub fn hint(&self) -> Option<&'static str> {
        match self {
            CliError::Core(e) => e.hint(),
            CliError::Limit(_) => Some("series has unavailable entries; use mc"),
            _ => None,
        }
    }
}
