//! Configuration, CSV output and the experiment runner.

pub mod config;
pub mod csv;
pub mod runner;

pub use config::{parse_config, parse_config_for, ConfigError, ExperimentConfig, Mode};
pub use runner::{run, CliError, RunReport};
