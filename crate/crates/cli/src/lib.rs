//! Batch runner for the ultralab experiments: configuration, subcommand
//! bodies and the acceptance criteria.

pub mod acceptance;
pub mod commands;
pub mod config;
pub mod error;

pub use config::{parse_config, ExperimentConfig, Overrides};
pub use error::CliError;
