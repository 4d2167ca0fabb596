//! Batch front end: parse a run config, execute a pipeline, write reports.

pub mod config;
pub mod json;
pub mod run;

pub use config::{parse_config, ConfigError, RunSpec};
pub use run::{run_analyze, run_solve, run_spectral, Outcome, RunError};
