//! Experiment harness: wires presets, solvers, and the variational module
//! into the theorem-level experiments and emits machine-readable reports.

pub mod config;
mod report;
mod runs;
pub mod selftest;

pub use config::{ExperimentConfig, CONFIG_KEYS};
pub use report::{CheckRow, ExperimentReport, VariationalSummary};
pub use runs::{
    experiment_classical, experiment_continuity, experiment_growth, experiment_jump,
    growth_defaults, jump_dt, run_scenario, variational_summary,
};
