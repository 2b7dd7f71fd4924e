//! Experiment orchestration: configs, deterministic runs, grids,
//! persistence, reports and the command-line interface.

pub mod cli;
mod config;
mod grid;
mod report;
mod run;
pub mod selftest;
pub mod synthgen;

pub use config::{
    ExperimentConfig, GridConfig, ModelConfig, Standardize, SyntheticKind, SyntheticSource,
};
pub use grid::{run_grid, GridCell};
pub use report::{build_report, load_records, Report, ReportFormat, ReportRow};
pub use run::{
    matrix_curve, persist, prepare_stream, run_experiment, run_on_stream, CurvePoint, RunRecord,
};
