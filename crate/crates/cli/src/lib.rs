//! Scenario files and subcommands of the `calabi` driver.

pub mod commands;
pub mod scenario;

pub use commands::{Exit, Failure, RunOptions};
pub use scenario::Scenario;
