//! Command-line tools, JSON/CSV formats and verification suites on top of
//! `rank1kit-core`.

pub mod acceptance;
pub mod commands;
pub mod config;
pub mod error;
pub mod formats;
pub mod verify;

pub use commands::{run, Output};
pub use config::{Command, JobConfig};
pub use error::CliError;
