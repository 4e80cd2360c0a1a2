//! Command-line harness: CSV input, experiment configuration and
//! orchestration, and report output.

pub mod config;
pub mod error;
pub mod experiment;
pub mod input;
pub mod report;

pub use config::{DataSource, ExperimentConfig, FacilitySweep, GroupSample};
pub use error::{CliError, Result};
pub use experiment::{run_experiment, run_sweep, subsample};
pub use input::load_csv;
pub use report::{emit_report, ExperimentReport, Format, ReportRow};
