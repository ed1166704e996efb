//! Scenario runner for the `iontrap` command.

pub mod commands;
pub mod error;
pub mod experiments;
pub mod output;
pub mod scenario;

pub use error::{CliError, CliResult};
pub use scenario::Scenario;
