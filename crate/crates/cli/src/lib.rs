//! File formats, reports and subcommands of the `hopfharm` tool.

pub mod cli;
pub mod commands;
pub mod error;
pub mod formats;
pub mod gallery;
pub mod report;
pub mod svg;

pub use cli::{run, Cli, Outcome};
pub use error::CliError;
pub use report::{RunReport, Status};
