//! Closed-form regret bounds and the loss simulators used to check them.
//!
//! Stochastic bounds depend on the sub-optimality gap `Δ` between the best
//! and runner-up expected losses, on loss variances, and (for dependent
//! losses) on the φ-mixing coefficients of the loss process. Worst-case bounds
//! only need `T`, `K` and the loss range.

use rand::Rng;
use rand_distr::{Beta, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::combiner::{replay_regret, LossPanel, SchemeConfig};
use crate::error::{Error, Result};
use crate::seeding::{derive_seed, rng};

/// Expected losses and second moments of a stationary loss process.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapProfile {
    pub means: Vec<f64>,
    pub variances: Vec<f64>,
    /// `min_{k≠k*} μ_k − μ_{k*}`.
    pub delta: f64,
    pub vmax: f64,
    /// Largest variance of an excess loss `ℓ^(k) − ℓ^(k*)`, `k ≠ k*`.
    pub excess_vmax: f64,
}

impl GapProfile {
    /// `excess_vmax` is supplied by the caller.
    pub fn new(means: Vec<f64>, variances: Vec<f64>, excess_vmax: f64) -> Result<Self> {
        if means.len() < 2 {
            return Err(Error::invalid("means", "need at least two experts"));
        }
        crate::error::check_len("variances", means.len(), variances.len())?;
        if means.iter().any(|m| !(0.0..=1.0).contains(m)) {
            return Err(Error::invalid("means", "expected losses must lie in [0, 1]"));
        }
        if variances.iter().any(|v| !(*v >= 0.0)) || !(excess_vmax >= 0.0) {
            return Err(Error::invalid("variances", "must be nonnegative"));
        }
        let best = best_expert(&means);
        let delta = means
            .iter()
            .enumerate()
            .filter(|(k, _)| *k != best)
            .map(|(_, m)| m - means[best])
            .fold(f64::INFINITY, f64::min);
        let vmax = variances.iter().copied().fold(0.0, f64::max);
        Ok(Self {
            means,
            variances,
            delta,
            vmax,
            excess_vmax,
        })
    }

    /// Experts independent of each other, so `Var(ℓ^(k) − ℓ^(k*)) = v_k + v_{k*}`.
    pub fn independent(means: Vec<f64>, variances: Vec<f64>) -> Result<Self> {
        crate::error::check_len("variances", means.len(), variances.len())?;
        let best = best_expert(&means);
        let excess = variances
            .iter()
            .enumerate()
            .filter(|(k, _)| *k != best)
            .map(|(_, v)| v + variances[best])
            .fold(0.0, f64::max);
        Self::new(means, variances, excess)
    }

    pub fn experts(&self) -> usize {
        self.means.len()
    }

    pub fn best(&self) -> usize {
        best_expert(&self.means)
    }

    fn checked_delta(&self) -> Result<f64> {
        if !(self.delta > 0.0) {
            return Err(Error::invalid(
                "delta",
                format!("sub-optimality gap must be positive, got {}", self.delta),
            ));
        }
        Ok(self.delta)
    }
}

fn best_expert(means: &[f64]) -> usize {
    means
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map_or(0, |(k, _)| k)
}

/// φ-mixing coefficients `φ_1, φ_2, …` (truncated where they vanish).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixingProfile {
    pub coefficients: Vec<f64>,
}

impl MixingProfile {
    pub fn new(coefficients: Vec<f64>) -> Result<Self> {
        if coefficients.iter().any(|c| !(0.0..=1.0).contains(c)) {
            return Err(Error::invalid("mixing coefficients", "must lie in [0, 1]"));
        }
        if coefficients.windows(2).any(|w| w[1] > w[0]) {
            log::warn!("mixing coefficients are not nonincreasing");
        }
        Ok(Self { coefficients })
    }

    /// All coefficients zero: an independent sequence.
    pub fn independent() -> Self {
        Self {
            coefficients: Vec::new(),
        }
    }

    /// `φ_n = min(1, scale · |ratio|ⁿ)`, truncated once terms drop below `1e-300`.
    pub fn geometric(scale: f64, ratio: f64) -> Result<Self> {
        if !(ratio.abs() < 1.0) || !(scale >= 0.0) {
            return Err(Error::invalid("mixing ratio", "need |ratio| < 1 and scale >= 0"));
        }
        let mut coefficients = Vec::new();
        let mut term = scale * ratio.abs();
        while term > 1e-300 && coefficients.len() < 100_000 {
            coefficients.push(term.min(1.0));
            term *= ratio.abs();
        }
        Ok(Self { coefficients })
    }

    /// Profile bounding the difference of two independent processes:
    /// `φ_n ≤ min(1, φ_n + ψ_n)`.
    pub fn difference(&self, other: &MixingProfile) -> MixingProfile {
        let n = self.coefficients.len().max(other.coefficients.len());
        let at = |c: &[f64], i: usize| c.get(i).copied().unwrap_or(0.0);
        MixingProfile {
            coefficients: (0..n)
                .map(|i| (at(&self.coefficients, i) + at(&other.coefficients, i)).min(1.0))
                .collect(),
        }
    }

    pub fn sum(&self) -> f64 {
        self.coefficients.iter().sum()
    }

    pub fn sum_sqrt(&self) -> f64 {
        self.coefficients.iter().map(|c| c.sqrt()).sum()
    }

    /// `1 + 4 Σ φ_n`.
    pub fn theta_h(&self) -> f64 {
        1.0 + 4.0 * self.sum()
    }

    /// `(1 + Σ √φ_n)²`.
    pub fn theta_b(&self) -> f64 {
        (1.0 + self.sum_sqrt()).powi(2)
    }

    /// `1 + Σ φ_n`.
    pub fn rho_h(&self) -> f64 {
        1.0 + self.sum()
    }

    /// `1 + Σ √φ_n`.
    pub fn rho_b(&self) -> f64 {
        1.0 + self.sum_sqrt()
    }
}

/// Hoeffding- and Bernstein-type constants; the bound is their minimum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundPair {
    pub hoeffding: f64,
    pub bernstein: f64,
}

impl BoundPair {
    pub fn min(&self) -> f64 {
        self.hoeffding.min(self.bernstein)
    }
}

fn check_k(k: usize, min: usize, what: &str) -> Result<f64> {
    if k < min {
        return Err(Error::invalid("K", format!("{what} requires K >= {min}, got {k}")));
    }
    Ok(k as f64)
}

/// FTL expected-regret constants; `mixing` is the per-expert loss profile.
pub fn ftl_bound_pair(profile: &GapProfile, mixing: Option<&MixingProfile>, k: usize) -> Result<BoundPair> {
    let k = check_k(k, 2, "the FTL bound")?;
    let d = profile.checked_delta()?;
    let d2 = d * d;
    let v = profile.vmax;
    Ok(match mixing {
        None => BoundPair {
            hoeffding: 2.0 + (2.0 * k.ln() + 4.0) / d2,
            bernstein: 2.0 + (8.0 * v + 4.0 / 3.0 * d) * ((2.0 * k).ln() + 2.0) / d2,
        },
        Some(m) => BoundPair {
            hoeffding: 3.0 + 8.0 * m.theta_h() * (k.ln() + 4.0) / d2,
            bernstein: 2.0 + 8.0 * m.theta_b() * (8.0 * v + d) * (k.ln() + 2.0) / d2,
        },
    })
}

/// `min(R^H, R^B)` for Follow-the-Leader.
pub fn ftl_bound(profile: &GapProfile, mixing: Option<&MixingProfile>, k: usize) -> Result<f64> {
    ftl_bound_pair(profile, mixing, k).map(|b| b.min())
}

/// Decreasing-Hedge (`c0 = 2`) expected-regret constants; `mixing` is the
/// profile of the excess-loss processes `ℓ^(k) − ℓ^(k*)`.
pub fn hedge_bound_pair(profile: &GapProfile, mixing: Option<&MixingProfile>, k: usize) -> Result<BoundPair> {
    let k = check_k(k, 3, "the decreasing Hedge bound (its proof assumes three or more experts)")?;
    let d = profile.checked_delta()?;
    let d2 = d * d;
    let v = profile.excess_vmax;
    let lk = k.ln();
    Ok(match mixing {
        None => BoundPair {
            hoeffding: (4.0 * d * lk + 25.0) / d2,
            bernstein: 1.0
                + lk.sqrt()
                + (4.0 * (2.0f64 / 3.0).sqrt() * d * lk + 8.0 * (v + d / 3.0) + 16.0) / d2,
        },
        Some(m) => {
            let rb = m.rho_b();
            BoundPair {
                hoeffding: 2.0 + (1.0 + 3.0 * m.rho_h()) * (d * lk + 16.0) / d2,
                bernstein: 1.0
                    + lk.sqrt()
                    + (4.0 * 5f64.sqrt() * rb * d * lk + 16.0 * rb * rb * (4.0 * v + d) + 16.0) / d2,
            }
        }
    })
}

/// `min(R^H, R^B)` for decreasing Hedge.
pub fn hedge_bound(profile: &GapProfile, mixing: Option<&MixingProfile>, k: usize) -> Result<f64> {
    hedge_bound_pair(profile, mixing, k).map(|b| b.min())
}

/// Adversarial regret bounds after `T` rounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WorstCaseBounds {
    /// `√(T log K)` for decreasing Hedge with `c0 = 2` on `[0, 1]` losses.
    pub decreasing: f64,
    /// `S √(T log K / 2)` for constant Hedge at the optimal rate.
    pub optimal_constant: f64,
    /// `S √(T log K) + S (4/3 log K + 2)` for AdaHedge with `s_t ≤ S`.
    pub adahedge: f64,
}

pub fn worstcase_hedge_bound(t: usize, k: usize, loss_range: f64) -> WorstCaseBounds {
    let tl = t as f64 * (k as f64).ln();
    WorstCaseBounds {
        decreasing: tl.sqrt(),
        optimal_constant: loss_range * (tl / 2.0).sqrt(),
        adahedge: loss_range * tl.sqrt() + adahedge_overhead(loss_range, k),
    }
}

fn adahedge_overhead(range: f64, k: usize) -> f64 {
    range * (4.0 / 3.0 * (k as f64).ln() + 2.0)
}

/// `√(Σ s_t² log K) + S_T (4/3 log K + 2)`.
pub fn adahedge_pathwise_bound(sum_squared_ranges: f64, max_range: f64, k: usize) -> f64 {
    (sum_squared_ranges * (k as f64).ln()).sqrt() + adahedge_overhead(max_range, k)
}

/// Marginal law of i.i.d. losses with a given mean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NoiseSpec {
    Bernoulli,
    /// `Beta(cμ, c(1−μ))`; degenerate at the endpoints.
    Beta { concentration: f64 },
}

impl NoiseSpec {
    pub fn variance(&self, mean: f64) -> f64 {
        match self {
            NoiseSpec::Bernoulli => mean * (1.0 - mean),
            NoiseSpec::Beta { concentration } => mean * (1.0 - mean) / (concentration + 1.0),
        }
    }
}

fn check_means(means: &[f64]) -> Result<()> {
    if means.is_empty() {
        return Err(Error::invalid("means", "need at least one expert"));
    }
    if means.iter().any(|m| !(0.0..=1.0).contains(m)) {
        return Err(Error::invalid("means", "must lie in [0, 1]"));
    }
    Ok(())
}

/// Independent draws, independent across experts and rounds.
pub fn simulate_iid_losses(means: &[f64], noise: NoiseSpec, rounds: usize, seed: u64) -> Result<LossPanel> {
    check_means(means)?;
    let betas = match noise {
        NoiseSpec::Bernoulli => None,
        NoiseSpec::Beta { concentration } => {
            if !(concentration > 0.0) {
                return Err(Error::invalid("concentration", "must be positive"));
            }
            Some(
                means
                    .iter()
                    .map(|&m| {
                        if m > 0.0 && m < 1.0 {
                            Beta::new(concentration * m, concentration * (1.0 - m))
                                .map(Some)
                                .map_err(|e| Error::invalid("beta", e.to_string()))
                        } else {
                            Ok(None)
                        }
                    })
                    .collect::<Result<Vec<_>>>()?,
            )
        }
    };
    let mut r = rng(seed, 0);
    let mut panel = LossPanel::new(means.len())?;
    let mut row = vec![0.0; means.len()];
    for _ in 0..rounds {
        for (k, slot) in row.iter_mut().enumerate() {
            *slot = match &betas {
                None => f64::from(u8::from(r.random::<f64>() < means[k])),
                Some(b) => match &b[k] {
                    Some(beta) => beta.sample(&mut r),
                    None => means[k],
                },
            };
        }
        panel.push_row(&row)?;
    }
    Ok(panel)
}

/// Two-state Markov chain modulating each expert's loss:
/// `ℓ_t = μ + a (s_t − π_1) + U(−w, w)`, clamped to `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainSpec {
    /// `P(0 → 1)`.
    pub p: f64,
    /// `P(1 → 0)`.
    pub q: f64,
    pub amplitude: f64,
    pub noise_half_width: f64,
}

impl ChainSpec {
    /// Symmetric chain (`p = q`) with second eigenvalue `lambda ∈ (−1, 1)`.
    pub fn symmetric(lambda: f64, amplitude: f64, noise_half_width: f64) -> Result<Self> {
        let p = (1.0 - lambda) / 2.0;
        let spec = Self {
            p,
            q: p,
            amplitude,
            noise_half_width,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.p) || !(0.0..=1.0).contains(&self.q) {
            return Err(Error::invalid("chain", "transition probabilities must lie in [0, 1]"));
        }
        let s = self.p + self.q;
        if !(s > 0.0 && s < 2.0) {
            return Err(Error::invalid(
                "chain",
                format!("p + q = {s} gives no unique stationary law; need 0 < p + q < 2"),
            ));
        }
        if !(self.amplitude >= 0.0) || !(self.noise_half_width >= 0.0) {
            return Err(Error::invalid("chain", "amplitude and noise width must be nonnegative"));
        }
        Ok(())
    }

    /// Second eigenvalue `1 − p − q`.
    pub fn eigenvalue(&self) -> f64 {
        1.0 - self.p - self.q
    }

    /// `(π_0, π_1)`.
    pub fn stationary(&self) -> (f64, f64) {
        let s = self.p + self.q;
        (self.q / s, self.p / s)
    }

    /// `φ_n = max(π_0, π_1) |1 − p − q|ⁿ`.
    pub fn mixing(&self) -> MixingProfile {
        let (p0, p1) = self.stationary();
        let lambda = self.eigenvalue();
        if lambda == 0.0 {
            return MixingProfile::independent();
        }
        MixingProfile::geometric(p0.max(p1), lambda).expect("validated chain")
    }

    /// Stationary loss variance `a² π_0 π_1 + w²/3` (before clamping).
    pub fn variance(&self) -> f64 {
        let (p0, p1) = self.stationary();
        self.amplitude.powi(2) * p0 * p1 + self.noise_half_width.powi(2) / 3.0
    }

    /// A stationary path of the chain.
    pub fn simulate<R: Rng>(&self, rounds: usize, rng: &mut R) -> Vec<u8> {
        let (_, p1) = self.stationary();
        let mut s = u8::from(rng.random::<f64>() < p1);
        let mut out = Vec::with_capacity(rounds);
        for _ in 0..rounds {
            out.push(s);
            let u = rng.random::<f64>();
            s = match s {
                0 => u8::from(u < self.p),
                _ => u8::from(u >= self.q),
            };
        }
        out
    }
}

/// Losses driven by one independent chain per expert. Returns the panel and
/// the analytic mixing profile shared by every expert's loss process.
pub fn simulate_mixing_losses(
    means: &[f64],
    chain: &ChainSpec,
    rounds: usize,
    seed: u64,
) -> Result<(LossPanel, MixingProfile)> {
    check_means(means)?;
    chain.validate()?;
    let (_, p1) = chain.stationary();
    let paths: Vec<Vec<u8>> = (0..means.len())
        .map(|k| chain.simulate(rounds, &mut rng(seed, 2 * k as u64)))
        .collect();
    let mut noise: Vec<_> = (0..means.len()).map(|k| rng(seed, 2 * k as u64 + 1)).collect();
    let w = chain.noise_half_width;
    let mut panel = LossPanel::new(means.len())?;
    let mut row = vec![0.0; means.len()];
    #[allow(clippy::needless_range_loop)]
    for t in 0..rounds {
        for (k, slot) in row.iter_mut().enumerate() {
            let u = if w > 0.0 { noise[k].random_range(-w..w) } else { 0.0 };
            let raw = means[k] + chain.amplitude * (f64::from(paths[k][t]) - p1) + u;
            *slot = raw.clamp(0.0, 1.0);
        }
        panel.push_row(&row)?;
    }
    Ok((panel, chain.mixing()))
}

/// Mean regret over replications, evaluated at several horizons.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloRegret {
    pub checkpoints: Vec<usize>,
    pub mean_regret: Vec<f64>,
    pub replications: usize,
    /// Rounds (summed over replications) where the leader set had several members.
    pub tie_rounds: usize,
}

/// Replays `scheme` on `replications` panels drawn by `generate(seed)`.
///
/// Replications run in parallel; seeds are `derive_seed(master_seed, i)` and
/// the averaging is done in replication order, so results do not depend on
/// the thread count.
pub fn monte_carlo_regret<F>(
    scheme: &SchemeConfig,
    replications: usize,
    master_seed: u64,
    checkpoints: &[usize],
    generate: F,
) -> Result<MonteCarloRegret>
where
    F: Fn(u64) -> Result<LossPanel> + Sync,
{
    if replications == 0 || checkpoints.is_empty() || checkpoints.contains(&0) {
        return Err(Error::invalid("monte carlo", "need replications and 1-based checkpoints"));
    }
    let runs = (0..replications as u64)
        .into_par_iter()
        .map(|i| {
            let panel = generate(derive_seed(master_seed, i))?;
            let ledger = replay_regret(scheme, &panel)?;
            let history = ledger.history();
            let at = checkpoints
                .iter()
                .map(|&t| {
                    history
                        .get(t - 1)
                        .map(|row| row.regret)
                        .ok_or_else(|| Error::invalid("checkpoint", format!("{t} beyond {} rounds", history.len())))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok((at, ledger.tie_rounds()))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut sums = vec![0.0; checkpoints.len()];
    let mut ties = 0;
    for (at, t) in &runs {
        for (s, r) in sums.iter_mut().zip(at) {
            *s += r;
        }
        ties += t;
    }
    Ok(MonteCarloRegret {
        checkpoints: checkpoints.to_vec(),
        mean_regret: sums.iter().map(|s| s / replications as f64).collect(),
        replications,
        tie_rounds: ties,
    })
}

/// One grid point of a bound-validation study. Expert `0` has mean
/// `0.5 − Δ/2`, all others `0.5 + Δ/2`; each loss is driven by a symmetric
/// two-state chain with eigenvalue `mixing_ratio` (`0` gives i.i.d. losses).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValidationPoint {
    pub experts: usize,
    pub delta: f64,
    pub mixing_ratio: f64,
    pub replications: usize,
    pub rounds: usize,
    pub seed: u64,
    #[serde(default = "default_amplitude")]
    pub amplitude: f64,
    #[serde(default = "default_half_width")]
    pub noise_half_width: f64,
}

fn default_amplitude() -> f64 {
    0.2
}
fn default_half_width() -> f64 {
    0.1
}

/// One row of the validation report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationRow {
    pub scheme: String,
    pub experts: usize,
    pub delta: f64,
    pub mixing_ratio: f64,
    pub empirical_mean_regret: f64,
    pub bound: f64,
    pub ratio: f64,
    pub pass: bool,
}

impl ValidationPoint {
    pub fn means(&self) -> Vec<f64> {
        (0..self.experts)
            .map(|k| if k == 0 { 0.5 - self.delta / 2.0 } else { 0.5 + self.delta / 2.0 })
            .collect()
    }

    pub fn chain(&self) -> Result<ChainSpec> {
        ChainSpec::symmetric(self.mixing_ratio, self.amplitude, self.noise_half_width)
    }

    fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::invalid(
                "delta",
                format!("bounds are undefined unless 0 < Δ < 1, got {}", self.delta),
            ));
        }
        if self.experts < 3 {
            return Err(Error::invalid("K", "validation runs both FTL and decreasing Hedge; need K >= 3"));
        }
        if self.rounds == 0 || self.replications == 0 {
            return Err(Error::invalid("rounds", "need at least one round and replication"));
        }
        let reach = 0.5 + self.delta / 2.0 + self.amplitude + self.noise_half_width;
        if reach > 1.0 {
            log::warn!("losses may be clamped at 1; bound inputs assume no clamping");
        }
        Ok(())
    }

    /// Monte-Carlo FTL and decreasing-Hedge rows.
    pub fn evaluate(&self) -> Result<Vec<ValidationRow>> {
        self.validate()?;
        let chain = self.chain()?;
        let means = self.means();
        let v = chain.variance();
        let profile = GapProfile::independent(means.clone(), vec![v; self.experts])?;
        let loss_mixing = chain.mixing();
        let (ftl_mix, hedge_mix) = if self.mixing_ratio == 0.0 {
            (None, None)
        } else {
            (Some(loss_mixing.clone()), Some(loss_mixing.difference(&loss_mixing)))
        };
        let generate = |seed: u64| simulate_mixing_losses(&means, &chain, self.rounds, seed).map(|(p, _)| p);
        let mut rows = Vec::new();
        for (name, scheme, bound) in [
            ("ftl", SchemeConfig::FollowTheLeader, ftl_bound(&profile, ftl_mix.as_ref(), self.experts)?),
            (
                "dec_hedge",
                SchemeConfig::decreasing_hedge(),
                hedge_bound(&profile, hedge_mix.as_ref(), self.experts)?,
            ),
        ] {
            let mc = monte_carlo_regret(&scheme, self.replications, self.seed, &[self.rounds], generate)?;
            let mean = mc.mean_regret[0];
            rows.push(ValidationRow {
                scheme: name.to_string(),
                experts: self.experts,
                delta: self.delta,
                mixing_ratio: self.mixing_ratio,
                empirical_mean_regret: mean,
                bound,
                ratio: mean / bound,
                pass: mean <= bound,
            });
        }
        Ok(rows)
    }
}
