//! Multi-frequency echo state networks and their ensembles.
//!
//! Every group of regressors is stored chronologically, `κ_q` rows per
//! low-frequency period. In tempo notation the last row of period `t` is
//! `(t, ⟨0/κ⟩)` and `(t, ⟨κ/κ⟩) ≡ (t+1, ⟨0/κ⟩)`, so the forecast of `Y_{t+1}`
//! is made from the state reached after the last row of period `t`.
//!
//! Two architectures are supported:
//!
//! - [`Architecture::Single`]: one reservoir fed the concatenation of all
//!   groups at the finest frequency; coarser groups repeat their most recent
//!   observation.
//! - [`Architecture::Multi`]: one reservoir per group, iterated at that
//!   group's own frequency; states are stacked at period ends.
//!
//! Missing observations are only tolerated as a trailing block (the ragged
//! edge); there the last available state is carried forward.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::combiner::{combine_forecasts, CombinerState, LossPanel, RegretLedger, SchemeConfig, WeightVector};
use crate::error::{check_len, Error, Result};
use crate::readout::{default_lambda_grid, fit_ridge, select_lambda, CvConfig, ReadoutCoefficients};
use crate::reservoir::{
    Distributions, EsnState, HyperParams, MatrixNorm, ReservoirConfig, ReservoirSpec,
};
use crate::seeding::derive_seed;

/// Leak-rate grid used by EN-αRP ensembles unless configured otherwise.
pub const DEFAULT_ALPHA_GRID: [f64; 5] = [0.1, 0.3, 0.5, 0.7, 0.9];
/// Periods of states excluded from readout fitting.
pub const DEFAULT_WASHOUT: usize = 4;
/// Fewer training rows than this is an error.
pub const MIN_TRAIN_ROWS: usize = 8;

/// Regressors observed `kappa` times per low-frequency period.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyGroup {
    pub name: String,
    kappa: usize,
    dim: usize,
    /// Row-major, `periods · kappa` rows of `dim` values.
    values: Vec<f64>,
}

impl FrequencyGroup {
    pub fn new(name: impl Into<String>, kappa: usize, dim: usize, values: Vec<f64>) -> Result<Self> {
        if kappa == 0 || dim == 0 {
            return Err(Error::invalid("frequency group", "kappa and dim must be >= 1"));
        }
        if !values.len().is_multiple_of(kappa * dim) {
            return Err(Error::invalid(
                "frequency group",
                format!("{} values do not fill whole periods of {kappa}×{dim}", values.len()),
            ));
        }
        if values.iter().any(|v| v.is_infinite()) {
            return Err(Error::NonFinite("frequency group"));
        }
        Ok(Self {
            name: name.into(),
            kappa,
            dim,
            values,
        })
    }

    pub fn from_rows(name: impl Into<String>, kappa: usize, rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        for r in rows {
            check_len("frequency group row", dim, r.len())?;
        }
        Self::new(name, kappa, dim, rows.concat())
    }

    pub fn kappa(&self) -> usize {
        self.kappa
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rows(&self) -> usize {
        self.values.len() / self.dim
    }

    pub fn periods(&self) -> usize {
        self.rows() / self.kappa
    }

    /// Chronological row `r`.
    pub fn row(&self, r: usize) -> &[f64] {
        &self.values[r * self.dim..(r + 1) * self.dim]
    }

    /// Row index of tempo position `(t, ⟨s/κ⟩)`, if inside the sample.
    pub fn tempo_row(&self, t: usize, s: usize) -> Option<usize> {
        if s >= self.kappa {
            return None;
        }
        let r = t * self.kappa + self.kappa - 1 + s;
        (r < self.rows()).then_some(r)
    }

    /// Observation at `(t, ⟨s/κ⟩)`.
    pub fn obs(&self, t: usize, s: usize) -> Option<&[f64]> {
        self.tempo_row(t, s).map(|r| self.row(r))
    }

    fn row_missing(&self, r: usize) -> bool {
        self.row(r).iter().any(|v| v.is_nan())
    }

    /// Number of leading rows before the trailing missing block.
    pub fn available_rows(&self) -> usize {
        let mut n = self.rows();
        while n > 0 && self.row_missing(n - 1) {
            n -= 1;
        }
        n
    }

    /// Period and tempo sub-index of chronological row `r`.
    fn tempo_of(&self, r: usize) -> (usize, usize) {
        let period = r / self.kappa;
        let pos = r % self.kappa;
        (period, (pos + 1) % self.kappa)
    }
}

/// Low-frequency target with its regressor groups.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiFreqSeries {
    /// `Y_t`; `NaN` marks an unknown value.
    pub target: Vec<f64>,
    pub groups: Vec<FrequencyGroup>,
    /// Optional period labels, e.g. `2008Q1`.
    #[serde(default)]
    pub labels: Vec<String>,
}

impl MultiFreqSeries {
    /// Checks coverage and that missing rows only form a trailing block.
    pub fn new(target: Vec<f64>, groups: Vec<FrequencyGroup>, labels: Vec<String>) -> Result<Self> {
        if groups.is_empty() {
            return Err(Error::invalid("groups", "at least one regressor group is required"));
        }
        let periods = target.len();
        if !labels.is_empty() {
            check_len("period labels", periods, labels.len())?;
        }
        for (q, g) in groups.iter().enumerate() {
            check_len("group periods", periods, g.periods())?;
            let avail = g.available_rows();
            if let Some(r) = (0..avail).find(|&r| g.row_missing(r)) {
                let (period, sub) = g.tempo_of(r);
                return Err(Error::MissingObservation { group: q, period, sub });
            }
        }
        Ok(Self {
            target,
            groups,
            labels,
        })
    }

    pub fn periods(&self) -> usize {
        self.target.len()
    }

    pub fn max_kappa(&self) -> usize {
        self.groups.iter().map(|g| g.kappa).max().unwrap_or(1)
    }

    pub fn input_dim(&self) -> usize {
        self.groups.iter().map(|g| g.dim).sum()
    }

    pub fn label(&self, t: usize) -> String {
        self.labels.get(t).cloned().unwrap_or_else(|| t.to_string())
    }
}

/// Inclusive range of target periods.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Span {
    pub first: usize,
    pub last: usize,
}

impl Span {
    pub fn new(first: usize, last: usize) -> Result<Self> {
        if first > last {
            return Err(Error::invalid("span", format!("first {first} after last {last}")));
        }
        Ok(Self { first, last })
    }

    pub fn len(&self) -> usize {
        self.last - self.first + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn iter(&self) -> std::ops::RangeInclusive<usize> {
        self.first..=self.last
    }

    fn check_targets(&self, data: &MultiFreqSeries, what: &'static str) -> Result<()> {
        if self.first == 0 {
            return Err(Error::invalid(what, "target period 0 has no preceding state"));
        }
        if self.last >= data.periods() {
            return Err(Error::invalid(
                what,
                format!("last period {} beyond sample of {}", self.last, data.periods()),
            ));
        }
        if self.iter().any(|t| !data.target[t].is_finite()) {
            return Err(Error::InsufficientData(format!("{what} contains unknown target values")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Architecture {
    Single,
    Multi,
}

/// Reservoir settings without a seed or input dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReservoirTemplate {
    pub dim_state: usize,
    /// Defaults to `min(1, 10/D)`.
    #[serde(default)]
    pub sparsity: Option<f64>,
    pub hyper: HyperParams,
    #[serde(default)]
    pub distributions: Distributions,
    #[serde(default = "frobenius")]
    pub norm: MatrixNorm,
}

fn frobenius() -> MatrixNorm {
    MatrixNorm::Frobenius
}

impl ReservoirTemplate {
    pub fn new(dim_state: usize, sparsity: f64, hyper: HyperParams) -> Self {
        Self {
            dim_state,
            sparsity: Some(sparsity),
            hyper,
            distributions: Distributions::default(),
            norm: MatrixNorm::Frobenius,
        }
    }

    pub fn sparsity(&self) -> f64 {
        self.sparsity
            .unwrap_or_else(|| (10.0 / self.dim_state.max(1) as f64).min(1.0))
    }

    fn config(&self, dim_input: usize, seed: u64) -> ReservoirConfig {
        ReservoirConfig {
            dim_state: self.dim_state,
            dim_input,
            sparsity: self.sparsity(),
            hyper: self.hyper,
            seed,
            distributions: self.distributions,
            norm: self.norm,
        }
    }
}

/// How the readout penalty is chosen.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "snake_case")]
pub enum LambdaPolicy {
    Fixed {
        lambda: f64,
    },
    CrossValidated {
        #[serde(default = "default_lambda_grid")]
        grid: Vec<f64>,
        #[serde(default)]
        cv: CvConfig,
    },
}

impl Default for LambdaPolicy {
    fn default() -> Self {
        LambdaPolicy::CrossValidated {
            grid: default_lambda_grid(),
            cv: CvConfig::default(),
        }
    }
}

/// Everything that defines an MFESN except its random draw.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MfesnTemplate {
    pub architecture: Architecture,
    /// One entry for `Single`, one per group for `Multi`.
    pub reservoirs: Vec<ReservoirTemplate>,
    #[serde(default = "default_washout")]
    pub washout: usize,
    #[serde(default)]
    pub lambda: LambdaPolicy,
}

fn default_washout() -> usize {
    DEFAULT_WASHOUT
}

impl MfesnTemplate {
    pub fn single(reservoir: ReservoirTemplate) -> Self {
        Self {
            architecture: Architecture::Single,
            reservoirs: vec![reservoir],
            washout: DEFAULT_WASHOUT,
            lambda: LambdaPolicy::default(),
        }
    }

    pub fn multi(reservoirs: Vec<ReservoirTemplate>) -> Self {
        Self {
            architecture: Architecture::Multi,
            reservoirs,
            washout: DEFAULT_WASHOUT,
            lambda: LambdaPolicy::default(),
        }
    }

    /// S-MFESN A: `D = 30`, sparsity `10/D`, `ρ = 0.5, γ = 1, α = 0.1`.
    pub fn s_mfesn_a() -> Self {
        let hyper = HyperParams::new(0.1, 0.5, 1.0, 0.0).expect("valid preset");
        Self::single(ReservoirTemplate::new(30, 10.0 / 30.0, hyper))
    }

    /// S-MFESN B: as A with `D = 120`.
    pub fn s_mfesn_b() -> Self {
        let hyper = HyperParams::new(0.1, 0.5, 1.0, 0.0).expect("valid preset");
        Self::single(ReservoirTemplate::new(120, 10.0 / 120.0, hyper))
    }

    /// M-MFESN A: monthly `D = 100` and daily `D = 20` reservoirs.
    pub fn m_mfesn_a() -> Self {
        let month = HyperParams::new(0.0, 0.5, 1.5, 0.0).expect("valid preset");
        let day = HyperParams::new(0.1, 0.5, 0.5, 0.0).expect("valid preset");
        Self::multi(vec![
            ReservoirTemplate::new(100, 0.1, month),
            ReservoirTemplate::new(20, 0.5, day),
        ])
    }

    /// M-MFESN B: as A with small scales.
    pub fn m_mfesn_b() -> Self {
        let month = HyperParams::new(0.3, 0.08, 0.25, 0.0).expect("valid preset");
        let day = HyperParams::new(0.99, 0.01, 0.01, 0.0).expect("valid preset");
        Self::multi(vec![
            ReservoirTemplate::new(100, 0.1, month),
            ReservoirTemplate::new(20, 0.5, day),
        ])
    }

    /// Same template with every reservoir's leak rate set to `alpha`.
    pub fn with_alpha(&self, alpha: f64) -> Result<Self> {
        let mut t = self.clone();
        for r in &mut t.reservoirs {
            r.hyper = HyperParams { alpha, ..r.hyper };
            r.hyper.validate()?;
        }
        Ok(t)
    }

    pub fn state_dim(&self) -> usize {
        self.reservoirs.iter().map(|r| r.dim_state).sum()
    }

    fn validate_for(&self, data: &MultiFreqSeries) -> Result<()> {
        for r in &self.reservoirs {
            r.hyper.validate()?;
        }
        match self.architecture {
            Architecture::Single => {
                check_len("single-reservoir templates", 1, self.reservoirs.len())?;
                let kmax = data.max_kappa();
                if let Some(g) = data.groups.iter().find(|g| !kmax.is_multiple_of(g.kappa)) {
                    return Err(Error::invalid(
                        "kappa",
                        format!("group `{}` frequency {} does not divide {kmax}", g.name, g.kappa),
                    ));
                }
            }
            Architecture::Multi => {
                check_len("multi-reservoir templates", data.groups.len(), self.reservoirs.len())?;
            }
        }
        Ok(())
    }

    /// Draws the reservoirs for `seed` without fitting a readout.
    pub fn instantiate(&self, seed: u64, data: &MultiFreqSeries) -> Result<MfesnModel> {
        self.validate_for(data)?;
        let reservoirs = match self.architecture {
            Architecture::Single => {
                vec![ReservoirSpec::sample(&self.reservoirs[0].config(data.input_dim(), derive_seed(seed, 0)))?]
            }
            Architecture::Multi => self
                .reservoirs
                .iter()
                .zip(&data.groups)
                .enumerate()
                .map(|(q, (r, g))| ReservoirSpec::sample(&r.config(g.dim, derive_seed(seed, q as u64))))
                .collect::<Result<_>>()?,
        };
        Ok(MfesnModel {
            architecture: self.architecture,
            reservoirs,
            kappas: data.groups.iter().map(|g| g.kappa).collect(),
            washout: self.washout,
            seed,
            readout: None,
            train: None,
        })
    }
}

/// One MFESN: frozen reservoirs plus (once fitted) a ridge readout.
#[derive(Debug, Clone, PartialEq)]
pub struct MfesnModel {
    architecture: Architecture,
    reservoirs: Vec<ReservoirSpec>,
    kappas: Vec<usize>,
    washout: usize,
    seed: u64,
    readout: Option<ReadoutCoefficients>,
    train: Option<Span>,
}

impl MfesnModel {
    pub fn architecture(&self) -> Architecture {
        self.architecture
    }

    pub fn reservoirs(&self) -> &[ReservoirSpec] {
        &self.reservoirs
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn washout(&self) -> usize {
        self.washout
    }

    /// Leak rate of the first reservoir (all reservoirs share it in ensembles).
    pub fn alpha(&self) -> f64 {
        self.reservoirs[0].hyper().alpha
    }

    /// `D_1 + … + D_Q`.
    pub fn state_dim(&self) -> usize {
        self.reservoirs.iter().map(ReservoirSpec::dim_state).sum()
    }

    pub fn readout(&self) -> Option<&ReadoutCoefficients> {
        self.readout.as_ref()
    }

    pub fn train_span(&self) -> Option<Span> {
        self.train
    }

    /// Replaces the readout; its dimension must match the stacked state.
    pub fn with_readout(mut self, readout: ReadoutCoefficients) -> Result<Self> {
        check_len("readout dimension", self.state_dim(), readout.dim())?;
        self.readout = Some(readout);
        Ok(self)
    }

    fn check_data(&self, data: &MultiFreqSeries) -> Result<()> {
        let kappas: Vec<usize> = data.groups.iter().map(|g| g.kappa).collect();
        if kappas != self.kappas {
            return Err(Error::invalid("data", "group frequencies differ from the fitted model"));
        }
        Ok(())
    }

    /// Stacked period-end states, one row per period.
    pub fn state_path(&self, data: &MultiFreqSeries) -> Result<DMatrix<f64>> {
        self.check_data(data)?;
        match self.architecture {
            Architecture::Single => single_path(&self.reservoirs[0], data),
            Architecture::Multi => {
                let paths = self
                    .reservoirs
                    .iter()
                    .zip(&data.groups)
                    .map(|(spec, g)| group_path(spec, g))
                    .collect::<Result<Vec<_>>>()?;
                let mut out = DMatrix::zeros(data.periods(), self.state_dim());
                let mut col = 0;
                for p in paths {
                    out.columns_mut(col, p.ncols()).copy_from(&p);
                    col += p.ncols();
                }
                Ok(out)
            }
        }
    }

    /// Stacked state `X_{t,Q}` at the end of period `t`.
    pub fn align_states(&self, data: &MultiFreqSeries, t: usize) -> Result<Vec<f64>> {
        if t >= data.periods() {
            return Err(Error::invalid("period", format!("{t} beyond sample of {}", data.periods())));
        }
        let path = self.state_path(data)?;
        Ok(path.row(t).iter().copied().collect())
    }

    /// Fits the readout on targets in `train` (each regressed on the previous period's state).
    pub fn fit(mut self, data: &MultiFreqSeries, train: Span, policy: &LambdaPolicy) -> Result<Self> {
        let path = self.state_path(data)?;
        let coef = fit_readout(&path, &data.target, train, self.washout, policy)?;
        self.readout = Some(coef);
        self.train = Some(train);
        Ok(self)
    }

    /// `Ŷ_{t+1}` from the state at the end of period `t`.
    pub fn forecast_one_step(&self, data: &MultiFreqSeries, t: usize) -> Result<f64> {
        let readout = self.readout.as_ref().ok_or(Error::Unfitted)?;
        readout.predict(&self.align_states(data, t)?)
    }

    /// Entry `t` is the forecast of `Y_{t+1}`.
    pub fn forecast_path(&self, data: &MultiFreqSeries) -> Result<Vec<f64>> {
        let readout = self.readout.as_ref().ok_or(Error::Unfitted)?;
        Ok(readout.predict_rows(&self.state_path(data)?)?.iter().copied().collect())
    }
}

/// Regresses `Y_{t+1}` on row `t` of `states` for every target period in `train`
/// whose regressor period is past the washout.
pub fn fit_readout(
    states: &DMatrix<f64>,
    target: &[f64],
    train: Span,
    washout: usize,
    policy: &LambdaPolicy,
) -> Result<ReadoutCoefficients> {
    if train.first == 0 {
        return Err(Error::invalid("train span", "target period 0 has no preceding state"));
    }
    if train.last >= target.len() || train.last >= states.nrows() {
        return Err(Error::invalid("train span", "extends beyond the sample"));
    }
    let first = train.first.max(washout + 1);
    if first > train.last {
        return Err(Error::InsufficientData("washout consumes the whole training span".into()));
    }
    let rows = train.last - first + 1;
    if rows < MIN_TRAIN_ROWS {
        return Err(Error::InsufficientData(format!(
            "{rows} training rows, need at least {MIN_TRAIN_ROWS}"
        )));
    }
    if rows * 2 < states.ncols() {
        log::warn!("{rows} training rows for a {}-dimensional state", states.ncols());
    }
    let x = states.rows(first - 1, rows).into_owned();
    let y = &target[first..=train.last];
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::InsufficientData("training span contains unknown targets".into()));
    }
    let lambda = match policy {
        LambdaPolicy::Fixed { lambda } => *lambda,
        LambdaPolicy::CrossValidated { grid, cv } => select_lambda(&x, y, grid, cv)?,
    };
    fit_ridge(&x, y, lambda)
}

/// Period-end states of one group's own reservoir.
fn group_path(spec: &ReservoirSpec, group: &FrequencyGroup) -> Result<DMatrix<f64>> {
    check_len("group reservoir input", spec.dim_input(), group.dim)?;
    let d = spec.dim_state();
    let avail = group.available_rows();
    let mut out = DMatrix::zeros(group.periods(), d);
    let mut state = EsnState::zeros(d);
    let mut scratch = nalgebra::DVector::zeros(d);
    for r in 0..group.rows() {
        if r < avail {
            spec.step_in_place(&mut state, group.row(r), &mut scratch)?;
        }
        if (r + 1) % group.kappa == 0 {
            out.row_mut(r / group.kappa).copy_from(&state.0.transpose());
        }
    }
    Ok(out)
}

/// Period-end states of a single reservoir run at the finest frequency.
fn single_path(spec: &ReservoirSpec, data: &MultiFreqSeries) -> Result<DMatrix<f64>> {
    check_len("single reservoir input", spec.dim_input(), data.input_dim())?;
    let kmax = data.max_kappa();
    let d = spec.dim_state();
    let avail: Vec<usize> = data.groups.iter().map(FrequencyGroup::available_rows).collect();
    let mut out = DMatrix::zeros(data.periods(), d);
    let mut state = EsnState::zeros(d);
    let mut scratch = nalgebra::DVector::zeros(d);
    let mut input = vec![0.0; data.input_dim()];
    for t in 0..data.periods() {
        for j in 0..kmax {
            let mut fresh = false;
            let mut offset = 0;
            for (g, &n_avail) in data.groups.iter().zip(&avail) {
                let slot = &mut input[offset..offset + g.dim];
                offset += g.dim;
                // rows observed up to fine step j of period t
                let seen = t * g.kappa + (j + 1) * g.kappa / kmax;
                if seen == 0 {
                    slot.fill(0.0);
                    continue;
                }
                let r = seen - 1;
                if r < n_avail {
                    fresh = true;
                    slot.copy_from_slice(g.row(r));
                } else if n_avail > 0 {
                    slot.copy_from_slice(g.row(n_avail - 1));
                } else {
                    slot.fill(0.0);
                }
            }
            if fresh {
                spec.step_in_place(&mut state, &input, &mut scratch)?;
            }
        }
        out.row_mut(t).copy_from(&state.0.transpose());
    }
    Ok(out)
}

/// Free-function form of [`MfesnModel::align_states`].
pub fn align_states(model: &MfesnModel, data: &MultiFreqSeries, t: usize) -> Result<Vec<f64>> {
    model.align_states(data, t)
}

/// Draws and fits one MFESN.
pub fn fit_mfesn(template: &MfesnTemplate, seed: u64, data: &MultiFreqSeries, train: Span) -> Result<MfesnModel> {
    template.instantiate(seed, data)?.fit(data, train, &template.lambda)
}

/// Free-function form of [`MfesnModel::forecast_one_step`].
pub fn forecast_one_step(model: &MfesnModel, data: &MultiFreqSeries, t: usize) -> Result<f64> {
    model.forecast_one_step(data, t)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EnsembleFamily {
    /// Reservoir redraws with fixed hyperparameters.
    #[serde(rename = "EN-RP", alias = "en_rp")]
    EnRp,
    /// Reservoir redraws across a leak-rate grid.
    #[serde(rename = "EN-aRP", alias = "en_alpha_rp")]
    EnAlphaRp,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleSpec {
    pub family: EnsembleFamily,
    pub template: MfesnTemplate,
    pub alpha_grid: Vec<f64>,
    pub seeds: Vec<u64>,
}

impl EnsembleSpec {
    /// `size` models with seeds derived from `master_seed`.
    pub fn new(family: EnsembleFamily, size: usize, template: MfesnTemplate, master_seed: u64) -> Self {
        Self {
            family,
            template,
            alpha_grid: DEFAULT_ALPHA_GRID.to_vec(),
            seeds: (0..size as u64).map(|k| derive_seed(master_seed, k)).collect(),
        }
    }

    pub fn with_alpha_grid(mut self, grid: Vec<f64>) -> Self {
        self.alpha_grid = grid;
        self
    }

    pub fn size(&self) -> usize {
        self.seeds.len()
    }

    /// Template for member `k`; EN-αRP cycles through the grid.
    pub fn member_template(&self, k: usize) -> Result<MfesnTemplate> {
        match self.family {
            EnsembleFamily::EnRp => Ok(self.template.clone()),
            EnsembleFamily::EnAlphaRp => self.template.with_alpha(self.alpha_grid[k % self.alpha_grid.len()]),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.seeds.is_empty() {
            return Err(Error::invalid("ensemble size", "must be >= 1"));
        }
        if self.family == EnsembleFamily::EnAlphaRp {
            let g = self.alpha_grid.len();
            if g == 0 {
                return Err(Error::invalid("alpha grid", "empty"));
            }
            if !self.size().is_multiple_of(g) {
                return Err(Error::invalid(
                    "ensemble size",
                    format!("{} models cannot be split equally over {g} leak rates", self.size()),
                ));
            }
            for &a in &self.alpha_grid {
                self.template.with_alpha(a)?;
            }
        }
        Ok(())
    }
}

/// Draws and fits every member of the ensemble, in parallel; output order follows `spec.seeds`.
pub fn build_ensemble(spec: &EnsembleSpec, data: &MultiFreqSeries, train: Span) -> Result<Vec<MfesnModel>> {
    spec.validate()?;
    train.check_targets(data, "train span")?;
    spec.seeds
        .par_iter()
        .enumerate()
        .map(|(k, &seed)| fit_mfesn(&spec.member_template(k)?, seed, data, train))
        .collect()
}

/// Result of playing one combination scheme over the evaluation span.
#[derive(Debug, Clone)]
pub struct SchemeOutcome {
    pub config: SchemeConfig,
    pub forecasts: Vec<f64>,
    /// Weights used at each round, before that round's losses were seen.
    pub weights: Vec<WeightVector>,
    pub ledger: RegretLedger,
    pub msfe: f64,
}

/// Everything produced by [`run_online_exercise`].
#[derive(Debug, Clone)]
pub struct ExerciseReport {
    /// Target periods, one per round.
    pub rounds: Vec<usize>,
    pub targets: Vec<f64>,
    /// `forecasts[round][k]`.
    pub expert_forecasts: Vec<Vec<f64>>,
    pub expert_msfe: Vec<f64>,
    /// Squared errors are divided by this before being fed to the combiners.
    pub normalizer: f64,
    pub clamped_losses: usize,
    pub schemes: Vec<SchemeOutcome>,
    pub baseline_msfe: Option<f64>,
}

impl ExerciseReport {
    pub fn relative(&self, msfe: f64) -> Option<f64> {
        self.baseline_msfe.map(|b| msfe / b)
    }

    pub fn expert_relative_msfe(&self) -> Option<Vec<f64>> {
        let b = self.baseline_msfe?;
        Some(self.expert_msfe.iter().map(|m| m / b).collect())
    }

    pub fn scheme(&self, scheme: crate::combiner::Scheme) -> Option<&SchemeOutcome> {
        self.schemes.iter().find(|s| s.config.scheme() == scheme)
    }
}

pub fn msfe(forecasts: &[f64], targets: &[f64]) -> f64 {
    forecasts
        .iter()
        .zip(targets)
        .map(|(f, y)| (y - f).powi(2))
        .sum::<f64>()
        / targets.len().max(1) as f64
}

/// Largest squared in-sample residual over all models' training rows; `1` if all fits are exact.
pub fn training_normalizer(models: &[MfesnModel], paths: &[Vec<f64>], data: &MultiFreqSeries) -> Result<f64> {
    let mut max = 0.0f64;
    for (m, path) in models.iter().zip(paths) {
        let train = m.train.ok_or(Error::Unfitted)?;
        for t in train.first.max(m.washout + 1)..=train.last {
            max = max.max((data.target[t] - path[t - 1]).powi(2));
        }
    }
    Ok(if max > 0.0 { max } else { 1.0 })
}

/// Plays every scheme over `eval`: at round `t` each model forecasts `Y_t` from
/// period `t−1`, each combiner publishes its weights, then the normalized
/// squared losses are revealed.
///
/// `baseline` is a forecast series over `eval` whose MSFE becomes the
/// denominator of relative MSFEs.
pub fn run_online_exercise(
    models: &[MfesnModel],
    data: &MultiFreqSeries,
    schemes: &[SchemeConfig],
    eval: Span,
    baseline: Option<&[f64]>,
) -> Result<ExerciseReport> {
    if models.is_empty() {
        return Err(Error::invalid("models", "no experts to combine"));
    }
    if schemes.is_empty() {
        return Err(Error::invalid("schemes", "no combination schemes"));
    }
    eval.check_targets(data, "evaluation span")?;
    for m in models {
        let train = m.train.ok_or(Error::Unfitted)?;
        if train.last >= eval.first {
            return Err(Error::invalid("evaluation span", "overlaps a model's training span"));
        }
    }
    let paths = models
        .par_iter()
        .map(|m| m.forecast_path(data))
        .collect::<Result<Vec<_>>>()?;
    let normalizer = training_normalizer(models, &paths, data)?;

    let k = models.len();
    let rounds: Vec<usize> = eval.iter().collect();
    let targets: Vec<f64> = rounds.iter().map(|&t| data.target[t]).collect();
    let expert_forecasts: Vec<Vec<f64>> = rounds.iter().map(|&t| paths.iter().map(|p| p[t - 1]).collect()).collect();

    let mut panel = LossPanel::new(k)?;
    for (f, y) in expert_forecasts.iter().zip(&targets) {
        let row: Vec<f64> = f.iter().map(|v| (y - v).powi(2) / normalizer).collect();
        panel.push_row(&row)?;
    }

    let mut outcomes = Vec::with_capacity(schemes.len());
    for config in schemes {
        let mut state = CombinerState::new(config, k)?;
        let mut ledger = RegretLedger::new(k);
        let mut forecasts = Vec::with_capacity(rounds.len());
        let mut weights = Vec::with_capacity(rounds.len());
        for (i, row) in panel.rows().enumerate() {
            forecasts.push(combine_forecasts(state.weights(), &expert_forecasts[i])?);
            weights.push(state.weights().clone());
            ledger.record(state.weights(), row)?;
            state.update(row)?;
        }
        let msfe = msfe(&forecasts, &targets);
        outcomes.push(SchemeOutcome {
            config: config.clone(),
            forecasts,
            weights,
            ledger,
            msfe,
        });
    }

    let expert_msfe = (0..k)
        .map(|j| {
            let f: Vec<f64> = expert_forecasts.iter().map(|r| r[j]).collect();
            msfe(&f, &targets)
        })
        .collect();
    let baseline_msfe = match baseline {
        Some(b) => {
            check_len("baseline forecasts", rounds.len(), b.len())?;
            Some(msfe(b, &targets))
        }
        None => None,
    };
    Ok(ExerciseReport {
        rounds,
        targets,
        expert_forecasts,
        expert_msfe,
        normalizer,
        clamped_losses: panel.clamped_entries(),
        schemes: outcomes,
        baseline_msfe,
    })
}

/// In-sample mean of the training targets, repeated over `eval`.
pub fn mean_benchmark(data: &MultiFreqSeries, train: Span, eval: Span) -> Result<Vec<f64>> {
    train.check_targets(data, "train span")?;
    let mean = train.iter().map(|t| data.target[t]).sum::<f64>() / train.len() as f64;
    Ok(vec![mean; eval.len()])
}

/// AR(1) fitted by least squares on the training targets.
pub fn ar1_benchmark(data: &MultiFreqSeries, train: Span, eval: Span) -> Result<Vec<f64>> {
    train.check_targets(data, "train span")?;
    eval.check_targets(data, "evaluation span")?;
    let lagged: Vec<f64> = train.iter().map(|t| data.target[t - 1]).collect();
    if lagged.iter().any(|v| !v.is_finite()) {
        return Err(Error::InsufficientData("AR(1) lag before the training span is unknown".into()));
    }
    let x = DMatrix::from_column_slice(lagged.len(), 1, &lagged);
    let y: Vec<f64> = train.iter().map(|t| data.target[t]).collect();
    let coef = fit_ridge(&x, &y, 0.0)?;
    eval.iter().map(|t| coef.predict(&[data.target[t - 1]])).collect()
}

/// Sorted values paired with their cumulative fraction `i/n`.
pub fn ecdf(values: &[f64]) -> Vec<(f64, f64)> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    v.into_iter().enumerate().map(|(i, x)| (x, (i + 1) as f64 / n)).collect()
}

/// ECDF inverse at 1/2: the `⌈n/2⌉`-th smallest value.
pub fn ecdf_median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    Some(v[values.len().div_ceil(2) - 1])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combiner::{Scheme, SchemeConfig};
    use nalgebra::DVector;

    fn hyper(alpha: f64) -> HyperParams {
        HyperParams::new(alpha, 0.5, 1.0, 0.0).unwrap()
    }

    fn quarterly(values: &[f64]) -> FrequencyGroup {
        FrequencyGroup::new("q", 1, 1, values.to_vec()).unwrap()
    }

    fn wave(n: usize, f: f64) -> Vec<f64> {
        (0..n).map(|i| (i as f64 * f).sin()).collect()
    }

    #[test]
    fn tempo_indexing() {
        let g = FrequencyGroup::new("m", 3, 1, (0..9).map(f64::from).collect()).unwrap();
        assert_eq!(g.periods(), 3);
        assert_eq!(g.obs(0, 0), Some(&[2.0][..]));
        assert_eq!(g.obs(0, 1), Some(&[3.0][..]));
        // (t, ⟨κ/κ⟩) ≡ (t+1, ⟨0/κ⟩): the last sub-step before (1, 0)
        assert_eq!(g.obs(0, 2), Some(&[4.0][..]));
        assert_eq!(g.obs(1, 0), Some(&[5.0][..]));
        assert_eq!(g.obs(2, 1), None);
    }

    #[test]
    fn interior_gap_is_reported() {
        let mut v: Vec<f64> = (0..9).map(f64::from).collect();
        v[4] = f64::NAN;
        let g = FrequencyGroup::new("m", 3, 1, v).unwrap();
        let err = MultiFreqSeries::new(vec![0.0; 3], vec![g], vec![]).unwrap_err();
        assert!(matches!(err, Error::MissingObservation { group: 0, period: 1, sub: 2 }));
    }

    #[test]
    fn single_group_unit_kappa_is_identity_alignment() {
        let data = MultiFreqSeries::new(vec![0.0; 6], vec![quarterly(&wave(6, 0.9))], vec![]).unwrap();
        let model = MfesnTemplate::single(ReservoirTemplate::new(4, 1.0, hyper(0.2)))
            .instantiate(3, &data)
            .unwrap();
        let path = model.reservoirs()[0]
            .run_sequence(&EsnState::zeros(4), &wave(6, 0.9).iter().map(|v| [*v]).collect::<Vec<_>>(), 0)
            .unwrap();
        for t in 0..6 {
            let s = model.align_states(&data, t).unwrap();
            assert_eq!(s.as_slice(), path.row(t).iter().copied().collect::<Vec<_>>().as_slice());
        }
    }

    #[test]
    fn multi_stacks_in_group_order() {
        let m = FrequencyGroup::new("m", 3, 1, wave(12, 0.4)).unwrap();
        let q = quarterly(&wave(4, 1.1));
        let data = MultiFreqSeries::new(vec![0.0; 4], vec![m, q], vec![]).unwrap();
        let model = MfesnTemplate::multi(vec![
            ReservoirTemplate::new(2, 1.0, hyper(0.1)),
            ReservoirTemplate::new(3, 1.0, hyper(0.1)),
        ])
        .instantiate(9, &data)
        .unwrap();
        let s = model.align_states(&data, 2).unwrap();
        assert_eq!(s.len(), 5);
        let first = model.reservoirs()[0]
            .run_sequence(&EsnState::zeros(2), &wave(12, 0.4).iter().map(|v| [*v]).collect::<Vec<_>>(), 0)
            .unwrap();
        assert_eq!(s[0], first[(8, 0)]);
        assert_eq!(s[1], first[(8, 1)]);
    }

    #[test]
    fn monthly_period_is_three_steps() {
        let spec = ReservoirSpec::from_raw(
            DMatrix::from_element(1, 1, 1.0),
            DMatrix::from_element(1, 1, 1.0),
            DVector::zeros(1),
            HyperParams::new(0.5, 0.5, 1.0, 0.0).unwrap(),
            MatrixNorm::Frobenius,
        )
        .unwrap();
        let g = FrequencyGroup::new("m", 3, 1, vec![0.3, -0.1, 0.2]).unwrap();
        let path = group_path(&spec, &g).unwrap();
        // oracle: three scalar applications of the state map
        let f = |x: f64, z: f64| 0.5 * x + 0.5 * (0.5 * x + z).tanh();
        let oracle = f(f(f(0.0, 0.3), -0.1), 0.2);
        assert!((path[(0, 0)] - oracle).abs() < 1e-15);
    }

    #[test]
    fn single_reservoir_sees_coarse_groups_late() {
        let m = FrequencyGroup::new("m", 3, 1, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        let q = quarterly(&[10.0, 20.0]);
        let data = MultiFreqSeries::new(vec![0.0; 2], vec![m, q], vec![]).unwrap();
        let model = MfesnTemplate::single(ReservoirTemplate::new(3, 1.0, hyper(0.3)))
            .instantiate(1, &data)
            .unwrap();
        let inputs = [
            [1.0, 0.0],
            [2.0, 0.0],
            [3.0, 10.0],
            [4.0, 10.0],
            [5.0, 10.0],
            [6.0, 20.0],
        ];
        let manual = model.reservoirs()[0].run_sequence(&EsnState::zeros(3), &inputs, 0).unwrap();
        let path = model.state_path(&data).unwrap();
        assert_eq!(path.row(0), manual.row(2));
        assert_eq!(path.row(1), manual.row(5));
    }

    #[test]
    fn ragged_edge_carries_state() {
        let mut v = wave(9, 0.5);
        v[8] = f64::NAN;
        let g = FrequencyGroup::new("m", 3, 1, v.clone()).unwrap();
        let data = MultiFreqSeries::new(vec![0.0; 3], vec![g], vec![]).unwrap();
        let model = MfesnTemplate::multi(vec![ReservoirTemplate::new(3, 1.0, hyper(0.3))])
            .instantiate(4, &data)
            .unwrap();
        let path = model.state_path(&data).unwrap();
        let inputs: Vec<[f64; 1]> = v[..8].iter().map(|x| [*x]).collect();
        let manual = model.reservoirs()[0].run_sequence(&EsnState::zeros(3), &inputs, 0).unwrap();
        assert_eq!(path.row(2), manual.row(7));
    }

    fn toy_data(periods: usize) -> MultiFreqSeries {
        let m = FrequencyGroup::new("m", 3, 2, {
            let a = wave(periods * 3, 0.37);
            let b = wave(periods * 3, 0.11);
            a.iter().zip(&b).flat_map(|(x, y)| [*x, *y]).collect()
        })
        .unwrap();
        let target = (0..periods).map(|t| (t as f64 * 0.37 * 3.0).sin() * 0.5).collect();
        MultiFreqSeries::new(target, vec![m], vec![]).unwrap()
    }

    #[test]
    fn constant_target_gives_constant_forecast() {
        let mut data = toy_data(40);
        data.target = vec![1.5; 40];
        let mut template = MfesnTemplate::single(ReservoirTemplate::new(6, 1.0, hyper(0.1)));
        template.lambda = LambdaPolicy::Fixed { lambda: 1e6 };
        let model = fit_mfesn(&template, 2, &data, Span::new(1, 30).unwrap()).unwrap();
        let r = model.readout().unwrap();
        assert!((r.intercept - 1.5).abs() < 1e-12);
        assert!(r.weights.iter().all(|w| w.abs() < 1e-12));
    }

    #[test]
    fn linear_teacher_is_recovered() {
        let mut data = toy_data(60);
        let template = MfesnTemplate {
            lambda: LambdaPolicy::Fixed { lambda: 1e-8 },
            ..MfesnTemplate::single(ReservoirTemplate::new(5, 1.0, hyper(0.2)))
        };
        let unfitted = template.instantiate(5, &data).unwrap();
        // oracle: build the target from the states themselves
        let path = unfitted.state_path(&data).unwrap();
        let w = DVector::from_vec(vec![0.5, -1.0, 2.0, 0.0, 1.5]);
        let teacher = &path * &w;
        data.target = std::iter::once(0.0).chain(teacher.iter().take(59).copied()).collect();
        let model = unfitted.fit(&data, Span::new(1, 45).unwrap(), &template.lambda).unwrap();
        for t in 46..59 {
            let f = model.forecast_one_step(&data, t).unwrap();
            assert!((f - teacher[t]).abs() < 1e-6, "t={t}: {f} vs {}", teacher[t]);
        }
    }

    #[test]
    fn too_few_training_rows() {
        let data = toy_data(20);
        let mut template = MfesnTemplate::single(ReservoirTemplate::new(4, 1.0, hyper(0.1)));
        template.lambda = LambdaPolicy::Fixed { lambda: 1.0 };
        assert!(matches!(
            fit_mfesn(&template, 1, &data, Span::new(1, 10).unwrap()),
            Err(Error::InsufficientData(_))
        ));
    }

    #[test]
    fn forecast_contracts() {
        let data = toy_data(30);
        let model = MfesnTemplate::single(ReservoirTemplate::new(4, 1.0, hyper(0.1)))
            .instantiate(1, &data)
            .unwrap();
        assert!(matches!(model.forecast_one_step(&data, 5), Err(Error::Unfitted)));
        let zero = model.clone().with_readout(ReadoutCoefficients::new(0.7, vec![0.0; 4], 1.0).unwrap()).unwrap();
        assert_eq!(zero.forecast_one_step(&data, 5).unwrap(), 0.7);
        let w = vec![0.3, -0.2, 0.1, 0.4];
        let once = model.clone().with_readout(ReadoutCoefficients::new(0.7, w.clone(), 1.0).unwrap()).unwrap();
        let twice = model
            .with_readout(ReadoutCoefficients::new(0.7, w.iter().map(|v| 2.0 * v).collect(), 1.0).unwrap())
            .unwrap();
        let a = once.forecast_one_step(&data, 9).unwrap() - 0.7;
        let b = twice.forecast_one_step(&data, 9).unwrap() - 0.7;
        assert!((b - 2.0 * a).abs() < 1e-14);
    }

    #[test]
    fn s_mfesn_a_preset() {
        let t = MfesnTemplate::s_mfesn_a();
        let r = &t.reservoirs[0];
        assert_eq!(r.dim_state, 30);
        assert_eq!((r.hyper.rho, r.hyper.gamma, r.hyper.alpha), (0.5, 1.0, 0.1));
        assert!((r.sparsity() - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn ensemble_allocation() {
        let template = MfesnTemplate::single(ReservoirTemplate::new(4, 1.0, hyper(0.1)));
        let rp = EnsembleSpec::new(EnsembleFamily::EnRp, 10, template.clone(), 7);
        let mut seeds = rp.seeds.clone();
        seeds.sort_unstable();
        seeds.dedup();
        assert_eq!(seeds.len(), 10);
        for k in 0..10 {
            assert_eq!(rp.member_template(k).unwrap(), template);
        }
        let arp = EnsembleSpec::new(EnsembleFamily::EnAlphaRp, 10, template.clone(), 7);
        let mut counts = std::collections::BTreeMap::new();
        for k in 0..10 {
            let a = arp.member_template(k).unwrap().reservoirs[0].hyper.alpha;
            *counts.entry((a * 10.0).round() as i64).or_insert(0) += 1;
        }
        assert_eq!(counts.len(), 5);
        assert!(counts.values().all(|&c| c == 2));
        assert!(EnsembleSpec::new(EnsembleFamily::EnAlphaRp, 12, template, 7).validate().is_err());
    }

    #[test]
    fn same_seed_same_forecasts() {
        let data = toy_data(40);
        let template = MfesnTemplate::single(ReservoirTemplate::new(5, 1.0, hyper(0.1)));
        let train = Span::new(1, 30).unwrap();
        let a = fit_mfesn(&template, 11, &data, train).unwrap();
        let b = fit_mfesn(&template, 11, &data, train).unwrap();
        assert_eq!(a.forecast_path(&data).unwrap(), b.forecast_path(&data).unwrap());
    }

    #[test]
    fn single_expert_exercise() {
        let data = toy_data(50);
        let template = MfesnTemplate::single(ReservoirTemplate::new(5, 1.0, hyper(0.1)));
        let model = fit_mfesn(&template, 3, &data, Span::new(1, 35).unwrap()).unwrap();
        let schemes = SchemeConfig::standard_set(1, 14).unwrap();
        let eval = Span::new(36, 49).unwrap();
        let report = run_online_exercise(&[model], &data, &schemes, eval, None).unwrap();
        for s in &report.schemes {
            for (i, f) in s.forecasts.iter().enumerate() {
                assert_eq!(*f, report.expert_forecasts[i][0]);
            }
            assert_eq!(s.msfe / report.expert_msfe[0], 1.0);
        }
    }

    #[test]
    fn perfect_expert_takes_all_ftl_weight() {
        let data = toy_data(50);
        let template = MfesnTemplate::single(ReservoirTemplate::new(5, 1.0, hyper(0.1)));
        let train = Span::new(1, 35).unwrap();
        let noisy = fit_mfesn(&template, 3, &data, train).unwrap();
        // perfect expert: readout that reproduces the target exactly is not
        // available, so rebuild the target from the expert itself
        let path = noisy.forecast_path(&data).unwrap();
        let mut data2 = data.clone();
        data2.target[36..50].copy_from_slice(&path[35..49]);
        let other = fit_mfesn(&template, 4, &data, train).unwrap();
        let report = run_online_exercise(
            &[other, noisy],
            &data2,
            &[SchemeConfig::FollowTheLeader],
            Span::new(36, 49).unwrap(),
            None,
        )
        .unwrap();
        let ftl = report.scheme(Scheme::FollowTheLeader).unwrap();
        assert_eq!(report.expert_msfe[1], 0.0);
        for w in &ftl.weights[1..] {
            assert_eq!(w.as_slice(), &[0.0, 1.0]);
        }
    }

    #[test]
    fn benchmarks() {
        let mut data = toy_data(20);
        data.target = (0..20).map(|t| 1.0 + 0.5f64.powi(t)).collect();
        let train = Span::new(1, 10).unwrap();
        let eval = Span::new(11, 19).unwrap();
        let mean = mean_benchmark(&data, train, eval).unwrap();
        let oracle = (1..=10).map(|t| data.target[t]).sum::<f64>() / 10.0;
        assert!((mean[0] - oracle).abs() < 1e-15);
        // exact AR(1): y_t − 1 = 0.5 (y_{t−1} − 1)
        let ar = ar1_benchmark(&data, train, eval).unwrap();
        for (i, t) in eval.iter().enumerate() {
            assert!((ar[i] - data.target[t]).abs() < 1e-9);
        }
    }

    #[test]
    fn ecdf_and_median() {
        let v = [0.9, 0.2, 0.5, 0.7];
        let e = ecdf(&v);
        assert_eq!(e[0], (0.2, 0.25));
        assert_eq!(e[3], (0.9, 1.0));
        assert_eq!(ecdf_median(&v), Some(0.5));
        assert_eq!(ecdf_median(&[3.0, 1.0, 2.0]), Some(2.0));
        assert_eq!(ecdf_median(&[]), None);
    }

    #[test]
    fn scalar_worked_example_end_to_end() {
        let spec = ReservoirSpec::from_raw(
            DMatrix::from_element(1, 1, 1.0),
            DMatrix::from_element(1, 1, 1.0),
            DVector::zeros(1),
            HyperParams::new(0.5, 0.5, 1.0, 0.0).unwrap(),
            MatrixNorm::Frobenius,
        )
        .unwrap();
        let z = wave(14, 0.8);
        let target: Vec<f64> = (0..14).map(|t| (t as f64 * 0.5).cos()).collect();
        let data = MultiFreqSeries::new(target.clone(), vec![quarterly(&z)], vec![]).unwrap();
        let mut model = MfesnTemplate::single(ReservoirTemplate::new(1, 1.0, hyper(0.5)))
            .instantiate(0, &data)
            .unwrap();
        model.reservoirs = vec![spec];
        model.washout = 0;
        let model = model.fit(&data, Span::new(1, 12).unwrap(), &LambdaPolicy::Fixed { lambda: 1.0 }).unwrap();

        // oracle: scalar state map, then the scalar centered ridge solution
        let mut x = [0.0f64; 14];
        let mut prev = 0.0;
        for t in 0..14 {
            prev = 0.5 * prev + 0.5 * (0.5 * prev + z[t]).tanh();
            x[t] = prev;
        }
        let xs = &x[0..12];
        let ys = &target[1..13];
        let xm = xs.iter().sum::<f64>() / 12.0;
        let ym = ys.iter().sum::<f64>() / 12.0;
        let sxy: f64 = xs.iter().zip(ys).map(|(a, b)| (a - xm) * (b - ym)).sum();
        let sxx: f64 = xs.iter().map(|a| (a - xm).powi(2)).sum();
        let w = sxy / (sxx + 1.0);
        let b = ym - xm * w;
        let r = model.readout().unwrap();
        assert!((r.weights[0] - w).abs() < 1e-12);
        assert!((r.intercept - b).abs() < 1e-12);
        assert!((model.forecast_one_step(&data, 13).unwrap() - (b + w * x[13])).abs() < 1e-12);
    }
}
