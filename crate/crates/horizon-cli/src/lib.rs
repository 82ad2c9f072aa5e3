//! Configuration, result files, the radial-solution cache and the commands
//! behind the `horizon-lab` binary.

pub mod cache;
pub mod commands;
pub mod config;
pub mod error;
pub mod output;

pub use error::{CliError, Result};
