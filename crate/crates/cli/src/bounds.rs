use std::path::{Path, PathBuf};

use mfesn_core::bounds::ValidationRow;

use crate::config::BoundsConfig;
use crate::error::{CliError, CliResult};
use crate::run::Overrides;

pub const REPORT_COLUMNS: [&str; 10] = [
    "scheme",
    "experts",
    "delta",
    "mixing_ratio",
    "replications",
    "rounds",
    "empirical_mean_regret",
    "bound",
    "ratio",
    "status",
];

#[derive(Debug, Clone)]
pub struct BoundsOutcome {
    pub report: PathBuf,
    pub rows: Vec<ValidationRow>,
}

impl BoundsOutcome {
    pub fn failures(&self) -> usize {
        self.rows.iter().filter(|r| !r.pass).count()
    }
}

/// Evaluates every point and writes `bounds_report.csv`; any FAIL row is a validation error.
pub fn run_bounds(config: &BoundsConfig) -> CliResult<BoundsOutcome> {
    let points = config.points()?;
    std::fs::create_dir_all(&config.out_dir).map_err(|e| CliError::io(&config.out_dir, e))?;
    let path = config.out_dir.join("bounds_report.csv");
    let e = |err: csv::Error| CliError::io(&path, std::io::Error::other(err));
    let mut w = csv::Writer::from_path(&path).map_err(e)?;
    w.write_record(REPORT_COLUMNS).map_err(e)?;
    let mut rows = Vec::new();
    for p in &points {
        log::info!("K={} Δ={} mixing={}", p.experts, p.delta, p.mixing_ratio);
        for r in p.evaluate()? {
            w.write_record([
                r.scheme.clone(),
                r.experts.to_string(),
                format!("{}", r.delta),
                format!("{}", r.mixing_ratio),
                p.replications.to_string(),
                p.rounds.to_string(),
                format!("{:.6}", r.empirical_mean_regret),
                format!("{:.6}", r.bound),
                format!("{:.6}", r.ratio),
                if r.pass { "PASS" } else { "FAIL" }.to_string(),
            ])
            .map_err(e)?;
            rows.push(r);
        }
    }
    w.flush().map_err(|err| CliError::io(&path, err))?;
    let outcome = BoundsOutcome { report: path, rows };
    match outcome.failures() {
        0 => Ok(outcome),
        n => Err(CliError::Validation(format!(
            "{n} rows exceed their bound; see {}",
            outcome.report.display()
        ))),
    }
}

pub fn cmd_bounds(config_path: &Path, overrides: &Overrides) -> CliResult<BoundsOutcome> {
    let mut config = BoundsConfig::from_path(config_path)?;
    if let Some(seed) = overrides.seed {
        config.seed = seed;
    }
    if let Some(dir) = &overrides.out_dir {
        config.out_dir = dir.clone();
    }
    run_bounds(&config)
}
