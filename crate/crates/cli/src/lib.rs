//! Configuration, commands and report types behind the `nonholo` binary.

pub mod commands;
pub mod config;
pub mod error;
pub mod report;

use std::path::Path;

pub use config::{parse_config, ConfigError, RunConfig};
pub use error::CliError;
pub use report::Report;

/// Name of the environment variable that overrides the configured seed.
pub const SEED_ENV: &str = "NONHOLO_SEED";

/// Reads and parses a configuration file, applying the seed override.
pub fn load_config(path: &Path, seed_env: Option<&str>) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    Ok(parse_config(&text)?.with_seed_override(seed_env)?)
}
