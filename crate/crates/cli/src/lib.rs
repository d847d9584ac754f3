//! Config-driven experiment runner around `resonance-core`.
//!
//! Every subcommand reads one TOML file, writes one table, and produces
//! byte-identical output for identical input.

pub mod config;
pub mod error;
pub mod output;
pub mod run;

use std::fs;
use std::io::Write;

pub use config::{ExperimentConfig, Format, Violation};
pub use error::CliError;
pub use run::{run, Command, Kind};

pub fn load_config(path: &str) -> Result<ExperimentConfig, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    ExperimentConfig::from_toml_str(&text)
}

/// Writes to `path`, or to standard output for `-`.
pub fn write_output(path: &str, content: &str) -> Result<(), CliError> {
    if path == "-" {
        let mut out = std::io::stdout().lock();
        out.write_all(content.as_bytes())
            .map_err(|e| CliError::io(path, e))?;
        return out.flush().map_err(|e| CliError::io(path, e));
    }
    fs::write(path, content).map_err(|e| CliError::io(path, e))
}
