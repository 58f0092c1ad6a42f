//! File formats, the run-config document, report writers and the command
//! line around `forge-core`.

pub mod cli;
pub mod config;
pub mod error;
pub mod formats;
pub mod report;

pub use config::RunConfig;
pub use error::{CliError, Result};
