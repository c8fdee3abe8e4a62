use std::io;
use std::path::{Path, PathBuf};

use thiserror::Error;

/// Failures that abort a command.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("{0}")]
    Core(#[from] debound_core::Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path}: {msg}")]
    Format { path: PathBuf, msg: String },
    #[error("csv output: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    pub fn io(path: &Path, source: io::Error) -> Self {
        CliError::Io { path: path.to_path_buf(), source }
    }

    pub fn status(&self) -> Status {
        match self {
            CliError::Core(debound_core::Error::Inadmissible(_)) => Status::Inadmissible,
            _ => Status::Usage,
        }
    }
}

/// Process exit codes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Ok = 0,
    Usage = 1,
    Inadmissible = 2,
    NonConvergence = 3,
    Failure = 4,
}

impl Status {
    pub fn code(self) -> u8 {
        self as u8
    }
}
