//! Reproducible experiment runner for the pdmp-core simulation engine.
//!
//! A run reads a [`config`] file, dispatches it to the simulations, couplings
//! and oracles of `pdmp-core`, and writes CSV tables and a JSON report whose
//! bytes depend only on the config and its seed.

pub mod config;
mod experiments;
pub mod output;
pub mod report;

pub use config::{parse_config, ConfigError, ExperimentConfig, Kind};
pub use experiments::{run_experiment, RunOptions};
pub use report::{ExperimentReport, Row, Verdict};
