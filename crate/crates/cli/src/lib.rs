//! Experiment driver: configuration documents, CSV results and reports.

pub mod config;
pub mod error;
pub mod output;
pub mod report;
pub mod run;

pub use config::{parse_seeds, ExperimentConfig, ExperimentKind};
pub use error::CliError;
pub use output::ResultRow;
pub use run::{execute, run, Outcome, RunOptions};
