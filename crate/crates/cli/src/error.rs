use std::path::Path;

use thiserror::Error;

/// Exit status for success.
pub const EXIT_OK: u8 = 0;
/// Computation failed or an output could not be written.
pub const EXIT_INTERNAL: u8 = 1;
/// Bad arguments or unusable input files. Also clap's usage-error code.
pub const EXIT_INPUT: u8 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => EXIT_INPUT,
            CliError::Internal(_) => EXIT_INTERNAL,
        }
    }

    pub fn input(msg: impl Into<String>) -> Self {
        CliError::Input(msg.into())
    }

    /// Classify an error raised while reading `path`: anything goes to input.
    pub fn reading(path: &Path, err: chaofdm::Error) -> Self {
        CliError::Input(format!("{}: {err}", path.display()))
    }

    /// Classify an error raised while writing `path`.
    pub fn writing(path: &Path, err: impl std::fmt::Display) -> Self {
        CliError::Internal(format!("cannot write {}: {err}", path.display()))
    }
}

impl From<chaofdm::Error> for CliError {
    fn from(err: chaofdm::Error) -> Self {
        if err.is_input_error() {
            CliError::Input(err.to_string())
        } else {
            CliError::Internal(err.to_string())
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
