//! Command-line front end and JSON file formats for `vgp-core`.

pub mod cli;
pub mod commands;
pub mod document;
pub mod error;
pub mod parallel;

pub use cli::Cli;
pub use commands::{execute, CommandResult};
pub use error::CliError;
