//! Configuration-driven runner for the cavity simulator: TOML experiment
//! files in, CSV series and `key=value` manifests out.

pub mod commands;
pub mod config;
pub mod ensemble;
pub mod error;
pub mod manifest;
pub mod output;

pub use commands::{execute, execute_text, Command, Experiment, Options, Outcome};
pub use config::{parse_config, ExperimentConfig};
pub use error::{CliError, CliResult, ConfigIssue};
