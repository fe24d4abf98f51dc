use std::path::Path;

use thiserror::Error;

/// A command failure, classified by exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("planning failed: {0}")]
    Planning(String),
    #[error("simulation failed: {0}")]
    Simulation(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Planning(_) => 3,
            CliError::Simulation(_) => 4,
            CliError::Io(_) => 5,
        }
    }

    pub(crate) fn io(path: &Path, e: std::io::Error) -> Self {
        CliError::Io(format!("{}: {e}", path.display()))
    }

    /// Prefixes a validation message with the file and field it came from.
    pub(crate) fn invalid(file: &Path, field: &str, e: impl std::fmt::Display) -> Self {
        CliError::Validation(format!("{}: {field}: {e}", file.display()))
    }
}

pub type CliResult<T> = Result<T, CliError>;
