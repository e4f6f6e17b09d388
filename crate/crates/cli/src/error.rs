use std::path::{Path, PathBuf};

use crate::config::ConfigError;

/// Exit status for a successful run.
pub const EXIT_OK: u8 = 0;
/// A check failed, or the computation itself broke down.
pub const EXIT_FAILURE: u8 = 1;
/// Bad command line, bad configuration, or an I/O error.
pub const EXIT_USAGE: u8 = 2;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),

    #[error("{0}")]
    Usage(String),

    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },

    #[error(transparent)]
    Compute(#[from] nonholo::Error),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Compute(_) => EXIT_FAILURE,
            CliError::Config(_) | CliError::Usage(_) | CliError::Io { .. } => EXIT_USAGE,
        }
    }
}
