//! Configuration, artifact persistence and experiment orchestration behind
//! the `anomalykit` command-line tool.

pub mod artifacts;
pub mod commands;
pub mod config;
mod error;
pub mod verify;

pub use error::CliError;
