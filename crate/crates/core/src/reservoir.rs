//! Leaky echo state network reservoirs.
//!
//! A reservoir is drawn once from its seed and then frozen. The state update is
//!
//! ```text
//! x_t = α x_{t-1} + (1 − α) tanh(ρ Ā x_{t-1} + γ C̄ z_t + ς ζ̄)
//! ```
//!
//! where `Ā` has unit spectral radius and `C̄`, `ζ̄` have unit norm.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::linalg::{spectral_norm, spectral_radius};
use crate::seeding;

/// Reservoir draws with spectral radius below this are rejected.
pub const MIN_RADIUS: f64 = 1e-12;
pub const MAX_RESAMPLES: u32 = 100;

/// `(α, ρ, γ, ς)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HyperParams {
    /// Leak rate in `[0, 1)`.
    pub alpha: f64,
    /// Spectral radius scale.
    pub rho: f64,
    /// Input scale.
    pub gamma: f64,
    /// Shift scale.
    #[serde(default)]
    pub sigma_shift: f64,
}

impl HyperParams {
    pub fn new(alpha: f64, rho: f64, gamma: f64, sigma_shift: f64) -> Result<Self> {
        let h = Self {
            alpha,
            rho,
            gamma,
            sigma_shift,
        };
        h.validate()?;
        Ok(h)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.alpha) {
            return Err(Error::invalid("alpha", format!("must lie in [0, 1), got {}", self.alpha)));
        }
        if !(self.rho > 0.0 && self.rho.is_finite()) {
            return Err(Error::invalid("rho", format!("must be positive, got {}", self.rho)));
        }
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(Error::invalid("gamma", format!("must be positive, got {}", self.gamma)));
        }
        if !(self.sigma_shift >= 0.0 && self.sigma_shift.is_finite()) {
            return Err(Error::invalid(
                "sigma_shift",
                format!("must be nonnegative, got {}", self.sigma_shift),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EntryDistribution {
    /// Bernoulli-masked standard normal entries.
    SparseNormal,
    /// Bernoulli-masked `Uniform(-1, 1)` entries.
    SparseUniform,
    Zero,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MatrixNorm {
    Frobenius,
    Spectral,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Distributions {
    pub state: EntryDistribution,
    pub input: EntryDistribution,
    pub shift: EntryDistribution,
}

impl Default for Distributions {
    fn default() -> Self {
        Self {
            state: EntryDistribution::SparseNormal,
            input: EntryDistribution::SparseUniform,
            shift: EntryDistribution::Zero,
        }
    }
}

fn default_norm() -> MatrixNorm {
    MatrixNorm::Frobenius
}

/// Everything needed to regenerate a reservoir; this is what gets serialized.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReservoirConfig {
    pub dim_state: usize,
    pub dim_input: usize,
    /// Expected fraction of nonzero entries in `Ã` and `C̃`.
    pub sparsity: f64,
    pub hyper: HyperParams,
    pub seed: u64,
    #[serde(default)]
    pub distributions: Distributions,
    #[serde(default = "default_norm")]
    pub norm: MatrixNorm,
}

impl ReservoirConfig {
    pub fn new(dim_state: usize, dim_input: usize, sparsity: f64, hyper: HyperParams, seed: u64) -> Self {
        Self {
            dim_state,
            dim_input,
            sparsity,
            hyper,
            seed,
            distributions: Distributions::default(),
            norm: MatrixNorm::Frobenius,
        }
    }
}

/// A normalized, frozen reservoir.
#[derive(Debug, Clone, PartialEq)]
pub struct ReservoirSpec {
    a_bar: DMatrix<f64>,
    c_bar: DMatrix<f64>,
    zeta_bar: DVector<f64>,
    hyper: HyperParams,
    norm: MatrixNorm,
    source: Option<ReservoirConfig>,
    // ρĀ, γC̄, ςζ̄
    a: DMatrix<f64>,
    c: DMatrix<f64>,
    shift: DVector<f64>,
}

impl ReservoirSpec {
    /// Draws `Ã, C̃, ζ̃` from `config.seed` and normalizes them.
    ///
    /// Draws whose state matrix has (numerically) zero spectral radius or whose
    /// input matrix is zero are discarded and redrawn on the next substream.
    pub fn sample(config: &ReservoirConfig) -> Result<Self> {
        config.hyper.validate()?;
        if config.dim_state == 0 || config.dim_input == 0 {
            return Err(Error::invalid("dims", "state and input dimensions must be >= 1"));
        }
        if !(config.sparsity > 0.0 && config.sparsity <= 1.0) {
            return Err(Error::invalid("sparsity", format!("must lie in (0, 1], got {}", config.sparsity)));
        }
        let (d, m) = (config.dim_state, config.dim_input);
        for attempt in 0..MAX_RESAMPLES {
            let mut rng = seeding::rng(config.seed, attempt as u64);
            let a = draw(&mut rng, d, d, config.sparsity, config.distributions.state);
            let c = draw(&mut rng, d, m, config.sparsity, config.distributions.input);
            let z = draw(&mut rng, d, 1, config.sparsity, config.distributions.shift);
            let (radius, _) = spectral_radius(&a)?;
            if radius < MIN_RADIUS || matrix_norm(&c, config.norm) == 0.0 {
                log::debug!("reservoir seed {} attempt {attempt} degenerate, redrawing", config.seed);
                continue;
            }
            let mut spec = Self::from_raw(a, c, z.column(0).into_owned(), config.hyper, config.norm)?;
            spec.source = Some(config.clone());
            return Ok(spec);
        }
        Err(Error::DegenerateReservoir {
            attempts: MAX_RESAMPLES,
            sparsity: config.sparsity,
        })
    }

    /// Normalizes explicit raw matrices: `Ā = Ã/ρ(Ã)`, `C̄ = C̃/‖C̃‖`, `ζ̄ = ζ̃/‖ζ̃‖` (zero stays zero).
    pub fn from_raw(
        a: DMatrix<f64>,
        c: DMatrix<f64>,
        zeta: DVector<f64>,
        hyper: HyperParams,
        norm: MatrixNorm,
    ) -> Result<Self> {
        hyper.validate()?;
        let d = a.nrows();
        if !a.is_square() {
            return Err(Error::DimensionMismatch {
                context: "state matrix",
                expected: d,
                found: a.ncols(),
            });
        }
        check_len("input matrix rows", d, c.nrows())?;
        check_len("shift vector", d, zeta.len())?;
        let (radius, _) = spectral_radius(&a)?;
        if radius < MIN_RADIUS {
            return Err(Error::invalid("state matrix", "spectral radius is zero"));
        }
        let c_norm = matrix_norm(&c, norm);
        if c_norm == 0.0 {
            return Err(Error::invalid("input matrix", "norm is zero"));
        }
        let z_norm = zeta.norm();
        let a_bar = a / radius;
        let c_bar = c / c_norm;
        let zeta_bar = if z_norm > 0.0 { zeta / z_norm } else { zeta };
        Ok(Self::assemble(a_bar, c_bar, zeta_bar, hyper, norm, None))
    }

    fn assemble(
        a_bar: DMatrix<f64>,
        c_bar: DMatrix<f64>,
        zeta_bar: DVector<f64>,
        hyper: HyperParams,
        norm: MatrixNorm,
        source: Option<ReservoirConfig>,
    ) -> Self {
        let a = &a_bar * hyper.rho;
        let c = &c_bar * hyper.gamma;
        let shift = &zeta_bar * hyper.sigma_shift;
        Self {
            a_bar,
            c_bar,
            zeta_bar,
            hyper,
            norm,
            source,
            a,
            c,
            shift,
        }
    }

    /// Re-applies the normalization to the already-normalized matrices.
    pub fn renormalized(&self) -> Result<Self> {
        let mut s = Self::from_raw(
            self.a_bar.clone(),
            self.c_bar.clone(),
            self.zeta_bar.clone(),
            self.hyper,
            self.norm,
        )?;
        s.source = self.source.clone();
        Ok(s)
    }

    /// Same draw with different hyperparameters.
    pub fn with_hyper(&self, hyper: HyperParams) -> Result<Self> {
        hyper.validate()?;
        let mut source = self.source.clone();
        if let Some(cfg) = source.as_mut() {
            cfg.hyper = hyper;
        }
        Ok(Self::assemble(
            self.a_bar.clone(),
            self.c_bar.clone(),
            self.zeta_bar.clone(),
            hyper,
            self.norm,
            source,
        ))
    }

    pub fn dim_state(&self) -> usize {
        self.a_bar.nrows()
    }

    pub fn dim_input(&self) -> usize {
        self.c_bar.ncols()
    }

    pub fn hyper(&self) -> &HyperParams {
        &self.hyper
    }

    pub fn a_bar(&self) -> &DMatrix<f64> {
        &self.a_bar
    }

    pub fn c_bar(&self) -> &DMatrix<f64> {
        &self.c_bar
    }

    pub fn zeta_bar(&self) -> &DVector<f64> {
        &self.zeta_bar
    }

    pub fn matrix_norm(&self) -> MatrixNorm {
        self.norm
    }

    /// Regeneration recipe, when the spec was sampled from one.
    pub fn config(&self) -> Option<&ReservoirConfig> {
        self.source.as_ref()
    }

    pub fn step(&self, state: &EsnState, input: &[f64]) -> Result<EsnState> {
        let mut next = state.clone();
        let mut scratch = DVector::zeros(self.dim_state());
        self.step_in_place(&mut next, input, &mut scratch)?;
        Ok(next)
    }

    /// In-place [`step`](Self::step); `scratch` must have length `D`.
    pub fn step_in_place(
        &self,
        state: &mut EsnState,
        input: &[f64],
        scratch: &mut DVector<f64>,
    ) -> Result<()> {
        check_len("reservoir input", self.dim_input(), input.len())?;
        check_len("reservoir state", self.dim_state(), state.0.len())?;
        if input.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("reservoir input"));
        }
        let alpha = self.hyper.alpha;
        self.a.mul_to(&state.0, scratch);
        for (j, &z) in input.iter().enumerate() {
            if z != 0.0 {
                scratch.axpy(z, &self.c.column(j), 1.0);
            }
        }
        *scratch += &self.shift;
        for (x, pre) in state.0.iter_mut().zip(scratch.iter()) {
            *x = alpha * *x + (1.0 - alpha) * pre.tanh();
        }
        Ok(())
    }

    /// Iterates over `inputs` from `x0` and returns the post-washout states as rows.
    pub fn run_sequence<I: AsRef<[f64]>>(
        &self,
        x0: &EsnState,
        inputs: &[I],
        washout: usize,
    ) -> Result<DMatrix<f64>> {
        if inputs.is_empty() {
            return Err(Error::InsufficientData("empty input sequence".into()));
        }
        if washout >= inputs.len() {
            return Err(Error::invalid(
                "washout",
                format!("{washout} leaves no states out of {}", inputs.len()),
            ));
        }
        let d = self.dim_state();
        let mut out = DMatrix::zeros(inputs.len() - washout, d);
        let mut state = x0.clone();
        let mut scratch = DVector::zeros(d);
        for (t, z) in inputs.iter().enumerate() {
            self.step_in_place(&mut state, z.as_ref(), &mut scratch)?;
            if t >= washout {
                out.row_mut(t - washout).copy_from(&state.0.transpose());
            }
        }
        Ok(out)
    }
}

impl Serialize for ReservoirSpec {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match &self.source {
            Some(cfg) => cfg.serialize(serializer),
            None => Err(serde::ser::Error::custom(
                "reservoir built from explicit matrices has no seed to serialize",
            )),
        }
    }
}

impl<'de> Deserialize<'de> for ReservoirSpec {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let cfg = ReservoirConfig::deserialize(deserializer)?;
        ReservoirSpec::sample(&cfg).map_err(serde::de::Error::custom)
    }
}

fn matrix_norm(m: &DMatrix<f64>, norm: MatrixNorm) -> f64 {
    match norm {
        MatrixNorm::Frobenius => m.norm(),
        MatrixNorm::Spectral => spectral_norm(m),
    }
}

fn draw<R: Rng>(rng: &mut R, rows: usize, cols: usize, density: f64, dist: EntryDistribution) -> DMatrix<f64> {
    if dist == EntryDistribution::Zero {
        return DMatrix::zeros(rows, cols);
    }
    // row-major fill so the draw order does not depend on storage layout
    let mut m = DMatrix::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            let keep = rng.random::<f64>() < density;
            let v = match dist {
                EntryDistribution::SparseNormal => StandardNormal.sample(rng),
                EntryDistribution::SparseUniform => rng.random_range(-1.0..1.0),
                EntryDistribution::Zero => unreachable!(),
            };
            if keep {
                m[(i, j)] = v;
            }
        }
    }
    m
}

/// Reservoir state vector.
#[derive(Debug, Clone, PartialEq)]
pub struct EsnState(pub DVector<f64>);

impl EsnState {
    pub fn zeros(dim: usize) -> Self {
        Self(DVector::zeros(dim))
    }

    pub fn from_vec(values: Vec<f64>) -> Self {
        Self(DVector::from_vec(values))
    }

    pub fn as_slice(&self) -> &[f64] {
        self.0.as_slice()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::dense_spectral_radius;

    fn hyper(alpha: f64, rho: f64, gamma: f64) -> HyperParams {
        HyperParams::new(alpha, rho, gamma, 0.0).unwrap()
    }

    fn scalar_spec(alpha: f64, rho: f64, gamma: f64) -> ReservoirSpec {
        ReservoirSpec::from_raw(
            DMatrix::from_element(1, 1, 1.0),
            DMatrix::from_element(1, 1, 1.0),
            DVector::zeros(1),
            hyper(alpha, rho, gamma),
            MatrixNorm::Frobenius,
        )
        .unwrap()
    }

    #[test]
    fn normalizes_diagonal_state_matrix() {
        let a = DMatrix::from_diagonal(&DVector::from_vec(vec![2.0, -1.0]));
        let c = DMatrix::from_column_slice(2, 1, &[3.0, 4.0]);
        let s = ReservoirSpec::from_raw(a, c, DVector::zeros(2), hyper(0.0, 0.5, 1.0), MatrixNorm::Frobenius).unwrap();
        assert!((s.a_bar()[(0, 0)] - 1.0).abs() < 1e-12);
        assert!((s.a_bar()[(1, 1)] + 0.5).abs() < 1e-12);
        assert!((s.c_bar()[(0, 0)] - 0.6).abs() < 1e-12);
        assert!((s.c_bar()[(1, 0)] - 0.8).abs() < 1e-12);
        assert_eq!(s.zeta_bar().norm(), 0.0);
    }

    #[test]
    fn pure_leak_keeps_state() {
        // alpha must stay below 1; check the limit numerically instead
        let s = scalar_spec(1.0 - 1e-15, 0.5, 1.0);
        let x = s.step(&EsnState::from_vec(vec![0.3]), &[5.0]).unwrap();
        assert!((x.0[0] - 0.3).abs() < 1e-14);
        assert!(HyperParams::new(1.0, 0.5, 1.0, 0.0).is_err());
    }

    #[test]
    fn zero_drive_gives_zero() {
        let s = scalar_spec(0.0, 1e-300, 1.0);
        let x = s.step(&EsnState::from_vec(vec![0.0]), &[0.0]).unwrap();
        assert_eq!(x.0[0], 0.0);
    }

    #[test]
    fn scalar_step_matches_hand_evaluation() {
        let s = scalar_spec(0.5, 0.5, 1.0);
        let x = s.step(&EsnState::from_vec(vec![0.2]), &[0.3]).unwrap();
        // oracle: 0.5 * 0.2 + 0.5 * tanh(0.5 * 0.2 + 0.3)
        let oracle = 0.5 * 0.2 + 0.5 * 0.4f64.tanh();
        assert!((x.0[0] - oracle).abs() < 1e-15);
        assert!((x.0[0] - 0.289_974_481_1).abs() < 1e-9);
    }

    #[test]
    fn step_rejects_nan() {
        let s = scalar_spec(0.5, 0.5, 1.0);
        assert!(s.step(&EsnState::zeros(1), &[f64::NAN]).is_err());
        assert!(s.step(&EsnState::zeros(1), &[1.0, 2.0]).is_err());
    }

    #[test]
    fn sampled_reservoir_is_normalized_and_reproducible() {
        let cfg = ReservoirConfig::new(30, 4, 10.0 / 30.0, hyper(0.1, 0.5, 1.0), 17);
        let s = ReservoirSpec::sample(&cfg).unwrap();
        assert!((dense_spectral_radius(s.a_bar()) - 1.0).abs() < 1e-8);
        assert!((s.c_bar().norm() - 1.0).abs() < 1e-10);
        assert_eq!(s.zeta_bar().norm(), 0.0);
        let again = ReservoirSpec::sample(&cfg).unwrap();
        assert_eq!(s, again);
        let other = ReservoirSpec::sample(&ReservoirConfig { seed: 18, ..cfg }).unwrap();
        assert_ne!(s.a_bar(), other.a_bar());
    }

    #[test]
    fn default_sparsity_by_dimension() {
        let d = 30usize;
        let sparsity = 10.0 / d as f64;
        assert!((sparsity * 100.0 - 33.3).abs() < 0.05);
        let cfg = ReservoirConfig::new(d, 1, sparsity, hyper(0.1, 0.5, 1.0), 3);
        let s = ReservoirSpec::sample(&cfg).unwrap();
        let nnz = s.a_bar().iter().filter(|v| **v != 0.0).count() as f64;
        let frac = nnz / (d * d) as f64;
        assert!((frac - sparsity).abs() < 0.06, "fraction {frac}");
    }

    #[test]
    fn nonzero_shift_is_unit_norm() {
        let mut cfg = ReservoirConfig::new(10, 2, 0.5, HyperParams::new(0.2, 0.9, 1.0, 0.3).unwrap(), 5);
        cfg.distributions.shift = EntryDistribution::SparseUniform;
        let s = ReservoirSpec::sample(&cfg).unwrap();
        let n = s.zeta_bar().norm();
        assert!(n == 0.0 || (n - 1.0).abs() < 1e-10);
    }

    #[test]
    fn spectral_input_norm_option() {
        let mut cfg = ReservoirConfig::new(8, 3, 1.0, hyper(0.2, 0.9, 1.0), 5);
        cfg.norm = MatrixNorm::Spectral;
        let s = ReservoirSpec::sample(&cfg).unwrap();
        assert!((spectral_norm(s.c_bar()) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn hopeless_sparsity_errors() {
        let cfg = ReservoirConfig::new(1, 1, 1e-9, hyper(0.1, 0.5, 1.0), 1);
        assert!(matches!(ReservoirSpec::sample(&cfg), Err(Error::DegenerateReservoir { .. })));
    }

    #[test]
    fn json_round_trip_regenerates_matrices() {
        let cfg = ReservoirConfig::new(12, 2, 0.4, hyper(0.3, 0.8, 1.2), 99);
        let s = ReservoirSpec::sample(&cfg).unwrap();
        let json = serde_json::to_string(&s).unwrap();
        assert!(json.contains("\"seed\":99"));
        assert!(json.contains("sparse-normal"));
        let back: ReservoirSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn renormalization_is_idempotent() {
        let cfg = ReservoirConfig::new(20, 3, 0.5, hyper(0.3, 0.8, 1.2), 4);
        let s = ReservoirSpec::sample(&cfg).unwrap();
        let r = s.renormalized().unwrap();
        assert!((r.a_bar() - s.a_bar()).amax() < 1e-12);
        assert!((r.c_bar() - s.c_bar()).amax() < 1e-12);
    }

    #[test]
    fn run_sequence_boundaries() {
        let cfg = ReservoirConfig::new(5, 1, 1.0, hyper(0.3, 0.8, 1.0), 4);
        let s = ReservoirSpec::sample(&cfg).unwrap();
        let inputs: Vec<[f64; 1]> = (0..10).map(|i| [i as f64 * 0.1]).collect();
        let all = s.run_sequence(&EsnState::zeros(5), &inputs, 0).unwrap();
        let last = s.run_sequence(&EsnState::zeros(5), &inputs, 9).unwrap();
        assert_eq!(last.nrows(), 1);
        assert_eq!(last.row(0), all.row(9));
        let zeros = vec![[0.0]; 10];
        let z = s.run_sequence(&EsnState::zeros(5), &zeros, 0).unwrap();
        assert_eq!(z.amax(), 0.0);
        let empty: Vec<[f64; 1]> = Vec::new();
        assert!(s.run_sequence(&EsnState::zeros(5), &empty, 0).is_err());
        assert!(s.run_sequence(&EsnState::zeros(5), &inputs, 10).is_err());
    }

    #[test]
    fn washout_forgets_initial_condition() {
        let cfg = ReservoirConfig::new(10, 1, 1.0, hyper(0.1, 0.5, 1.0), 8);
        let s = ReservoirSpec::sample(&cfg).unwrap();
        let inputs: Vec<[f64; 1]> = (0..80).map(|i| [(i as f64 * 0.7).sin()]).collect();
        let a = s.run_sequence(&EsnState::from_vec(vec![0.9; 10]), &inputs, 50).unwrap();
        let b = s.run_sequence(&EsnState::from_vec(vec![-0.9; 10]), &inputs, 50).unwrap();
        // oracle: sup-norm gap of the two post-washout trajectories
        let gap = (&a - &b).amax();
        assert!(gap < 1e-6, "gap {gap}");
    }
}
