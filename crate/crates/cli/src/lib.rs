//! Command-line front end for first-digit divergence statistics and
//! Equivalent Contamination Proportion estimates.

pub mod cache;
pub mod commands;
pub mod error;
pub mod input;
pub mod report;
pub mod tables;

pub use commands::{run, Cli};
pub use error::{CliError, CliResult};
