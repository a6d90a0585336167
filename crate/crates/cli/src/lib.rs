//! Experiment runner, CSV/SVG reporting and the bound suites behind the
//! `rgreedi` binary.

pub mod config;
pub mod error;
pub mod experiment;
pub mod report;
pub mod suite;

pub use config::{Experiment, ExperimentConfig, FixedPartition, ReferenceMode};
pub use error::{CliError, Result};
pub use experiment::{run_experiment, run_experiment_detailed, DetailedRow, ResultRow};
pub use report::{csv_string, emit_csv, emit_plot, plot_svg, read_csv};
