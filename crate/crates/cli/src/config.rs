use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use mfesn_core::bounds::ValidationPoint;
use mfesn_core::mfesn::Span;
use mfesn_core::synthetic::SyntheticConfig;
use mfesn_core::{EnsembleFamily, MfesnTemplate, MultiFreqSeries, SchemeConfig};

use crate::error::{CliError, CliResult};

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> CliResult<T> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

/// Where the panel comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataSource {
    /// Manifest JSON listing the CSV files; relative to the config file.
    Manifest(PathBuf),
    Synthetic(SyntheticConfig),
}

impl DataSource {
    pub fn load(&self) -> CliResult<MultiFreqSeries> {
        Ok(match self {
            DataSource::Manifest(p) => mfesn_core::dataio::load_manifest(p)?,
            DataSource::Synthetic(c) => mfesn_core::synthetic::generate(c)?,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    SMfesnA,
    SMfesnB,
    MMfesnA,
    MMfesnB,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TemplateRef {
    Preset(Preset),
    Custom(MfesnTemplate),
}

impl TemplateRef {
    pub fn template(&self) -> MfesnTemplate {
        match self {
            TemplateRef::Preset(Preset::SMfesnA) => MfesnTemplate::s_mfesn_a(),
            TemplateRef::Preset(Preset::SMfesnB) => MfesnTemplate::s_mfesn_b(),
            TemplateRef::Preset(Preset::MMfesnA) => MfesnTemplate::m_mfesn_a(),
            TemplateRef::Preset(Preset::MMfesnB) => MfesnTemplate::m_mfesn_b(),
            TemplateRef::Custom(t) => t.clone(),
        }
    }
}

/// One row block of the MSFE table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub name: String,
    pub template: TemplateRef,
    pub family: EnsembleFamily,
    pub size: usize,
    #[serde(default)]
    pub alpha_grid: Option<Vec<f64>>,
    /// Seed of the single model in the Baseline column; defaults to the master seed.
    #[serde(default)]
    pub baseline_seed: Option<u64>,
}

/// A target period, by index or by label such as `2015Q1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PeriodRef {
    Index(usize),
    Label(String),
}

impl PeriodRef {
    fn resolve(&self, data: &MultiFreqSeries) -> CliResult<usize> {
        match self {
            PeriodRef::Index(i) => Ok(*i),
            PeriodRef::Label(l) => data
                .labels
                .iter()
                .position(|x| x == l)
                .ok_or_else(|| CliError::Config(format!("unknown period label `{l}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpanConfig {
    pub first: PeriodRef,
    pub last: PeriodRef,
}

impl SpanConfig {
    pub fn resolve(&self, data: &MultiFreqSeries) -> CliResult<Span> {
        Ok(Span::new(self.first.resolve(data)?, self.last.resolve(data)?)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Benchmark {
    #[default]
    #[serde(rename = "mean")]
    Mean,
    #[serde(rename = "ar1")]
    Ar1,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub data: DataSource,
    pub models: Vec<ModelConfig>,
    /// Defaults to the standard set tuned for the evaluation length.
    #[serde(default)]
    pub schemes: Option<Vec<SchemeConfig>>,
    pub train: SpanConfig,
    pub eval: SpanConfig,
    /// Denominator of every relative MSFE.
    #[serde(default)]
    pub benchmark: Benchmark,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_out_dir")]
    pub out_dir: PathBuf,
}

fn default_out_dir() -> PathBuf {
    PathBuf::from("out")
}

impl ExperimentConfig {
    /// Reads the file and makes relative paths relative to it.
    pub fn from_path(path: &Path) -> CliResult<Self> {
        let mut c: Self = read_json(path)?;
        let base = path.parent().unwrap_or(Path::new("."));
        if let DataSource::Manifest(p) = &mut c.data {
            *p = resolve(base, p);
        }
        c.out_dir = resolve(base, &c.out_dir);
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> CliResult<()> {
        if self.models.is_empty() {
            return Err(CliError::Config("no models configured".into()));
        }
        let mut names = std::collections::BTreeSet::new();
        for m in &self.models {
            if m.size == 0 {
                return Err(CliError::Config(format!("model `{}`: size must be > 0", m.name)));
            }
            if !names.insert(slug(&m.name)) {
                return Err(CliError::Config(format!("duplicate model name `{}`", m.name)));
            }
        }
        if matches!(&self.schemes, Some(s) if s.is_empty()) {
            return Err(CliError::Config("scheme list is empty".into()));
        }
        Ok(())
    }

    /// Train and evaluation spans; train must end before evaluation starts.
    pub fn spans(&self, data: &MultiFreqSeries) -> CliResult<(Span, Span)> {
        let train = self.train.resolve(data)?;
        let eval = self.eval.resolve(data)?;
        if train.last >= eval.first {
            return Err(CliError::Config(format!(
                "train span ends at {} but evaluation starts at {}",
                train.last, eval.first
            )));
        }
        Ok((train, eval))
    }
}

/// File-system friendly model name.
pub fn slug(name: &str) -> String {
    let mut s: String = name
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() { c.to_ascii_lowercase() } else { '_' })
        .collect();
    while s.contains("__") {
        s = s.replace("__", "_");
    }
    s.trim_matches('_').to_string()
}

/// Grid of validation points; every combination is evaluated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsGrid {
    pub experts: Vec<usize>,
    pub deltas: Vec<f64>,
    pub mixing_ratios: Vec<f64>,
    pub replications: usize,
    pub rounds: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsConfig {
    #[serde(default)]
    pub grid: Option<BoundsGrid>,
    /// Explicit points, evaluated after the grid.
    #[serde(default)]
    pub points: Vec<ValidationPoint>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_out_dir")]
    pub out_dir: PathBuf,
}

impl BoundsConfig {
    pub fn from_path(path: &Path) -> CliResult<Self> {
        let mut c: Self = read_json(path)?;
        c.out_dir = resolve(path.parent().unwrap_or(Path::new(".")), &c.out_dir);
        Ok(c)
    }

    /// Grid points (seeded from the master seed) followed by explicit points.
    pub fn points(&self) -> CliResult<Vec<ValidationPoint>> {
        let mut out = Vec::new();
        if let Some(g) = &self.grid {
            for &k in &g.experts {
                for &delta in &g.deltas {
                    for &mixing_ratio in &g.mixing_ratios {
                        let seed = mfesn_core::seeding::derive_seed(self.seed, out.len() as u64);
                        out.push(ValidationPoint {
                            experts: k,
                            delta,
                            mixing_ratio,
                            replications: g.replications,
                            rounds: g.rounds,
                            seed,
                            amplitude: 0.2,
                            noise_half_width: 0.1,
                        });
                    }
                }
            }
        }
        out.extend(self.points.iter().copied());
        if out.is_empty() {
            return Err(CliError::Config("bounds config has no points".into()));
        }
        Ok(out)
    }
}
