//! Library half of the `trustvote` command: config loading, exporters and
//! subcommand bodies, kept separate from argument parsing so they can be tested.

pub mod commands;
pub mod config;
pub mod error;
pub mod export;
pub mod reproduce;

pub use error::{CliError, CliResult};
