//! Library side of the `rose` command-line tool.

pub mod commands;
pub mod config;
pub mod error;
pub mod plot;

pub use error::CliError;
