//! Command-line driver and experiment runner for `lacunary-core`.

pub mod cli;
pub mod commands;
pub mod config;
pub mod error;
pub mod report;
pub mod scan;

pub use error::{CliError, CliResult};
