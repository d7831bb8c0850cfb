//! Command-line front end for the telegraph simulator: config parsing,
//! subcommand dispatch and self-describing report files.

pub mod commands;
pub mod config;
pub mod error;

pub use commands::{run, run_command, Command, Outcome, EXIT_SIGNALING};
pub use config::{parse_config, RunConfig};
pub use error::CliError;
