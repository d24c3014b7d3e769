//! File-facing side of the simulator: experiment configs, demand traces,
//! metric logs, checkpoints and the multi-seed experiment runner behind the
//! `oranmec` command line.

pub mod config;
pub mod experiment;
pub mod records;
pub mod trace;

pub use config::{Experiment, ExperimentFile, Platform, WorkloadSource};
pub use experiment::{compare_files, run_experiment, run_oracle, RunOptions, SeedOutcome};
