use std::collections::BTreeMap;
use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use mfesn_core::combiner::write_weights_csv;
use mfesn_core::mfesn::{
    ar1_benchmark, build_ensemble, ecdf, ecdf_median, fit_mfesn, mean_benchmark, msfe, run_online_exercise,
    ExerciseReport,
};
use mfesn_core::{EnsembleSpec, MultiFreqSeries, Scheme, SchemeConfig};

use crate::config::{slug, Benchmark, ExperimentConfig, ModelConfig};
use crate::error::{CliError, CliResult};

/// Column order of `msfe_table.csv`.
pub const TABLE_COLUMNS: [&str; 9] = [
    "Model", "Baseline", "Median", "Average", "RollMSE", "FTL", "Hedge", "DecHedge", "AdaHedge",
];

/// Schemes behind the combination columns, after Baseline and Median.
pub const TABLE_SCHEMES: [Scheme; 6] = [
    Scheme::SimpleAverage,
    Scheme::RollingMse,
    Scheme::FollowTheLeader,
    Scheme::HedgeConstant,
    Scheme::HedgeDecreasing,
    Scheme::AdaHedge,
];

pub const MISSING: &str = "--";

#[derive(Debug, Clone)]
pub struct ModelResult {
    pub name: String,
    pub slug: String,
    pub report: ExerciseReport,
    /// Leak rate of each ensemble member.
    pub alphas: Vec<f64>,
    pub baseline_relative: f64,
}

impl ModelResult {
    pub fn expert_relative(&self) -> Vec<f64> {
        self.report.expert_relative_msfe().expect("benchmark is always set")
    }

    pub fn scheme_relative(&self, scheme: Scheme) -> Option<f64> {
        self.report.scheme(scheme).and_then(|s| self.report.relative(s.msfe))
    }
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub out_dir: PathBuf,
    pub files: Vec<PathBuf>,
    pub simplex_violations: usize,
    pub benchmark_msfe: f64,
    pub mean_relative: f64,
    pub ar1_relative: f64,
    pub models: Vec<ModelResult>,
}

fn fmt(v: f64) -> String {
    format!("{v:.6}")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| MISSING.to_string(), fmt)
}

fn create(path: &Path) -> CliResult<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path).map_err(|e| CliError::io(path, e))?))
}

fn csv_writer(path: &Path) -> CliResult<csv::Writer<BufWriter<File>>> {
    Ok(csv::Writer::from_writer(create(path)?))
}

fn csv_err(path: &Path, e: csv::Error) -> CliError {
    CliError::io(path, std::io::Error::other(e))
}

fn run_model(
    model: &ModelConfig,
    data: &MultiFreqSeries,
    config: &ExperimentConfig,
    schemes: &[SchemeConfig],
    benchmark: &[f64],
) -> CliResult<ModelResult> {
    let (train, eval) = config.spans(data)?;
    let template = model.template.template();
    let mut spec = EnsembleSpec::new(model.family, model.size, template.clone(), config.seed);
    if let Some(grid) = &model.alpha_grid {
        spec = spec.with_alpha_grid(grid.clone());
    }
    log::info!("{}: fitting {} members", model.name, spec.size());
    let members = build_ensemble(&spec, data, train)?;
    let alphas = members.iter().map(|m| m.alpha()).collect();
    let report = run_online_exercise(&members, data, schemes, eval, Some(benchmark))?;

    let baseline = fit_mfesn(&template, model.baseline_seed.unwrap_or(config.seed), data, train)?;
    let path = baseline.forecast_path(data)?;
    let forecasts: Vec<f64> = eval.iter().map(|t| path[t - 1]).collect();
    let baseline_msfe = msfe(&forecasts, &report.targets);
    let baseline_relative = report.relative(baseline_msfe).expect("benchmark is set");
    Ok(ModelResult {
        name: model.name.clone(),
        slug: slug(&model.name),
        report,
        alphas,
        baseline_relative,
    })
}

/// Fits every model, plays the combiners and writes all result files.
pub fn run_experiment(config: &ExperimentConfig) -> CliResult<RunOutcome> {
    config.validate()?;
    let data = config.data.load()?;
    let (train, eval) = config.spans(&data)?;
    let targets: Vec<f64> = eval.iter().map(|t| data.target[t]).collect();
    let mean_fc = mean_benchmark(&data, train, eval)?;
    let ar1_fc = ar1_benchmark(&data, train, eval)?;
    let (mean_msfe, ar1_msfe) = (msfe(&mean_fc, &targets), msfe(&ar1_fc, &targets));
    let (benchmark, benchmark_msfe) = match config.benchmark {
        Benchmark::Mean => (&mean_fc, mean_msfe),
        Benchmark::Ar1 => (&ar1_fc, ar1_msfe),
    };
    if benchmark_msfe <= 0.0 {
        return Err(CliError::Validation("benchmark MSFE is zero; relative MSFEs are undefined".into()));
    }

    let mut models = Vec::with_capacity(config.models.len());
    for m in &config.models {
        let schemes = match &config.schemes {
            Some(s) => s.clone(),
            None => SchemeConfig::standard_set(m.size, eval.len())?,
        };
        models.push(run_model(m, &data, config, &schemes, benchmark)?);
    }

    let out = &config.out_dir;
    std::fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
    let mut outcome = RunOutcome {
        out_dir: out.clone(),
        files: Vec::new(),
        simplex_violations: 0,
        benchmark_msfe,
        mean_relative: mean_msfe / benchmark_msfe,
        ar1_relative: ar1_msfe / benchmark_msfe,
        models,
    };
    write_table(&mut outcome)?;
    write_ecdfs(&mut outcome)?;
    write_trajectories(&mut outcome, &data)?;
    if outcome.simplex_violations > 0 {
        return Err(CliError::Validation(format!(
            "{} weight vectors left the simplex",
            outcome.simplex_violations
        )));
    }
    Ok(outcome)
}

fn write_table(outcome: &mut RunOutcome) -> CliResult<()> {
    let path = outcome.out_dir.join("msfe_table.csv");
    let mut w = csv_writer(&path)?;
    let e = |err| csv_err(&path, err);
    w.write_record(TABLE_COLUMNS).map_err(e)?;
    for (name, value) in [("Mean", outcome.mean_relative), ("AR(1)", outcome.ar1_relative)] {
        let mut row = vec![name.to_string(), fmt(value)];
        row.extend(std::iter::repeat_n(MISSING.to_string(), TABLE_COLUMNS.len() - 2));
        w.write_record(&row).map_err(e)?;
    }
    for m in &outcome.models {
        let base = m.baseline_relative;
        let mut values = vec![Some(base), ecdf_median(&m.expert_relative())];
        values.extend(TABLE_SCHEMES.iter().map(|s| m.scheme_relative(*s)));
        let mut row = vec![m.name.clone()];
        row.extend(values.iter().map(|v| fmt_opt(*v)));
        w.write_record(&row).map_err(e)?;
        let mut pct = vec![format!("{} (% vs Baseline)", m.name), MISSING.to_string()];
        pct.extend(values[1..].iter().map(|v| fmt_opt(v.map(|v| 100.0 * (v / base - 1.0)))));
        w.write_record(&pct).map_err(e)?;
    }
    w.flush().map_err(|err| CliError::io(&path, err))?;
    outcome.files.push(path);
    Ok(())
}

fn write_ecdfs(outcome: &mut RunOutcome) -> CliResult<()> {
    let path = outcome.out_dir.join("ecdf.csv");
    let mut w = csv_writer(&path)?;
    let e = |err| csv_err(&path, err);
    w.write_record(["model", "msfe", "fraction"]).map_err(e)?;
    for m in &outcome.models {
        for (v, f) in ecdf(&m.expert_relative()) {
            w.write_record([m.name.clone(), format!("{v:.12}"), format!("{f:.6}")]).map_err(e)?;
        }
    }
    w.flush().map_err(|err| CliError::io(&path, err))?;
    outcome.files.push(path);

    let path = outcome.out_dir.join("ecdf_by_alpha.csv");
    let mut w = csv_writer(&path)?;
    let e = |err| csv_err(&path, err);
    w.write_record(["model", "alpha", "msfe", "fraction"]).map_err(e)?;
    for m in &outcome.models {
        let mut groups: BTreeMap<String, Vec<f64>> = BTreeMap::new();
        for (a, v) in m.alphas.iter().zip(m.expert_relative()) {
            groups.entry(format!("{a:.6}")).or_default().push(v);
        }
        for (alpha, values) in groups {
            for (v, f) in ecdf(&values) {
                w.write_record([m.name.clone(), alpha.clone(), format!("{v:.12}"), format!("{f:.6}")])
                    .map_err(e)?;
            }
        }
    }
    w.flush().map_err(|err| CliError::io(&path, err))?;
    outcome.files.push(path);
    Ok(())
}

fn write_trajectories(outcome: &mut RunOutcome, data: &MultiFreqSeries) -> CliResult<()> {
    for m in &outcome.models {
        let dir = outcome.out_dir.join(&m.slug);
        std::fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
        let rounds_path = dir.join("rounds.csv");
        let mut w = csv_writer(&rounds_path)?;
        let e = |err| csv_err(&rounds_path, err);
        w.write_record(["round", "period", "target"]).map_err(e)?;
        for (i, (&t, y)) in m.report.rounds.iter().zip(&m.report.targets).enumerate() {
            w.write_record([(i + 1).to_string(), data.label(t), format!("{y:.12}")]).map_err(e)?;
        }
        w.flush().map_err(|err| CliError::io(&rounds_path, err))?;
        outcome.files.push(rounds_path);

        for s in &m.report.schemes {
            let name = s.config.scheme().slug();
            let bad = s.weights.iter().filter(|w| w.validate().is_err()).count();
            if bad > 0 {
                log::error!("{}: {bad} {name} weight vectors off the simplex", m.name);
                outcome.simplex_violations += bad;
            } else {
                let path = dir.join(format!("weights_{name}.csv"));
                write_weights_csv(create(&path)?, &s.weights)?;
                outcome.files.push(path);
            }
            let path = dir.join(format!("regret_{name}.csv"));
            s.ledger.write_csv(create(&path)?)?;
            outcome.files.push(path);
        }
    }
    Ok(())
}

/// Optional command-line overrides of config fields.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out_dir: Option<PathBuf>,
}

pub fn cmd_run(config_path: &Path, overrides: &Overrides) -> CliResult<RunOutcome> {
    let mut config = ExperimentConfig::from_path(config_path)?;
    if let Some(seed) = overrides.seed {
        config.seed = seed;
    }
    if let Some(dir) = &overrides.out_dir {
        config.out_dir = dir.clone();
    }
    run_experiment(&config)
}
