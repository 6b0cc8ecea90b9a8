//! Experiment runner, self-test and gallery listing for `psido`.

pub mod config;
pub mod runner;
pub mod selftest;

pub use config::{ConfigError, ExperimentConfig, FilterEntry, SymbolEntry, Tolerances};
pub use runner::{run_config, run_path, RunError, RunOptions, RunSummary, WORKERS_ENV};
pub use selftest::{Check, SelftestReport};
