//! Experiment driver: JSON configs, runs over a list of `n`, and JSON/CSV
//! output.

mod config;
mod emit;
mod run;

pub use config::{
    parse_config, AlgorithmConfig, ModelConfig, OutputConfig, OutputFormat, RunConfig, ScenarioConfig, StartUnits,
    StepRule, SubsolutionConfig, DEFAULT_REFINE_ITERS, DEFAULT_RESOLUTION,
};
pub use emit::{emit, render, to_csv, to_json, CSV_HEADER};
pub use run::{build_subsolution, run, seed_for, NResult, RunManifest, RunOptions, Timing};

use crate::error::ConfigError;

/// Reads and parses a config file.
pub fn load_config(path: &std::path::Path) -> Result<RunConfig, ConfigError> {
    parse_config(&std::fs::read_to_string(path)?)
}
