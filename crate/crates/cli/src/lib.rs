//! Command-line pipelines: ensemble forecasting runs, regret-bound
//! validation, and synthetic dataset generation.

pub mod bounds;
pub mod config;
pub mod error;
pub mod run;

use std::path::{Path, PathBuf};

use mfesn_core::synthetic::{generate_panel, SyntheticConfig};

pub use bounds::{cmd_bounds, run_bounds, BoundsOutcome};
pub use config::{BoundsConfig, ExperimentConfig};
pub use error::{CliError, CliResult};
pub use run::{cmd_run, run_experiment, Overrides, RunOutcome};

/// Writes a synthetic dataset (CSV files plus `manifest.json`) into `dir`.
pub fn cmd_synth(dir: &Path, config: &SyntheticConfig) -> CliResult<PathBuf> {
    Ok(generate_panel(config)?.write_dataset(dir)?)
}
