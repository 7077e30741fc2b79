//! Command-line front end for the reflected OU estimators: path simulation,
//! estimation from CSV, the multi-seed table experiment and the derivative
//! curve of the third moment function.

pub mod cli;
pub mod commands;
pub mod config;
pub mod error;
pub mod format;

pub use cli::{run, Cli};
pub use config::ExperimentConfig;
pub use error::CliError;
