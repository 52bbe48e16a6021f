use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::panel::clamp_loss;
use super::weights::WeightVector;
use crate::error::{check_len, Error, Result};

/// Default scale of the decreasing Hedge learning rate.
pub const DEFAULT_C0: f64 = 2.0;
pub const DEFAULT_ROLL_WINDOW: usize = 4;
pub const DEFAULT_ROLL_EPSILON: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Scheme {
    SimpleAverage,
    RollingMse,
    FollowTheLeader,
    HedgeConstant,
    HedgeDoubling,
    HedgeDecreasing,
    AdaHedge,
}

impl Scheme {
    /// Short lowercase identifier used in file names.
    pub fn slug(self) -> &'static str {
        match self {
            Scheme::SimpleAverage => "sa",
            Scheme::RollingMse => "rollmse",
            Scheme::FollowTheLeader => "ftl",
            Scheme::HedgeConstant => "hedge",
            Scheme::HedgeDoubling => "doubling_hedge",
            Scheme::HedgeDecreasing => "dec_hedge",
            Scheme::AdaHedge => "adahedge",
        }
    }
}

/// Scheme choice plus its tuning parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "scheme", rename_all = "snake_case")]
pub enum SchemeConfig {
    SimpleAverage,
    RollingMse {
        #[serde(default = "default_window")]
        window: usize,
        #[serde(default = "default_epsilon")]
        epsilon: f64,
    },
    FollowTheLeader,
    HedgeConstant {
        eta: f64,
    },
    HedgeDoubling {
        /// Upper bound on the per-round loss range `S`.
        #[serde(default = "default_loss_range")]
        loss_range: f64,
    },
    HedgeDecreasing {
        #[serde(default = "default_c0")]
        c0: f64,
    },
    AdaHedge,
}

fn default_window() -> usize {
    DEFAULT_ROLL_WINDOW
}
fn default_epsilon() -> f64 {
    DEFAULT_ROLL_EPSILON
}
fn default_loss_range() -> f64 {
    1.0
}
fn default_c0() -> f64 {
    DEFAULT_C0
}

impl SchemeConfig {
    pub fn scheme(&self) -> Scheme {
        match self {
            SchemeConfig::SimpleAverage => Scheme::SimpleAverage,
            SchemeConfig::RollingMse { .. } => Scheme::RollingMse,
            SchemeConfig::FollowTheLeader => Scheme::FollowTheLeader,
            SchemeConfig::HedgeConstant { .. } => Scheme::HedgeConstant,
            SchemeConfig::HedgeDoubling { .. } => Scheme::HedgeDoubling,
            SchemeConfig::HedgeDecreasing { .. } => Scheme::HedgeDecreasing,
            SchemeConfig::AdaHedge => Scheme::AdaHedge,
        }
    }

    pub fn rolling_mse() -> Self {
        SchemeConfig::RollingMse {
            window: DEFAULT_ROLL_WINDOW,
            epsilon: DEFAULT_ROLL_EPSILON,
        }
    }

    pub fn decreasing_hedge() -> Self {
        SchemeConfig::HedgeDecreasing { c0: DEFAULT_C0 }
    }

    /// Simple average, rolling MSE, FTL, constant Hedge (tuned for
    /// `planned_rounds`), decreasing Hedge and AdaHedge, in that order.
    pub fn standard_set(k: usize, planned_rounds: usize) -> Result<Vec<Self>> {
        let constant = if k >= 2 {
            Self::constant_hedge_for_horizon(k, planned_rounds)?
        } else {
            SchemeConfig::HedgeConstant { eta: 1.0 }
        };
        Ok(vec![
            SchemeConfig::SimpleAverage,
            Self::rolling_mse(),
            SchemeConfig::FollowTheLeader,
            constant,
            Self::decreasing_hedge(),
            SchemeConfig::AdaHedge,
        ])
    }

    /// Constant Hedge tuned for a known horizon and `[0, 1]` losses.
    pub fn constant_hedge_for_horizon(k: usize, planned_rounds: usize) -> Result<Self> {
        Ok(SchemeConfig::HedgeConstant {
            eta: optimal_constant_rate(k, planned_rounds, 1.0)?,
        })
    }
}

/// `η* = sqrt(8 log K / (S² T))`, the minimizer of `log K / η + η S² T / 8`.
pub fn optimal_constant_rate(k: usize, planned_rounds: usize, loss_range: f64) -> Result<f64> {
    if k < 2 {
        return Err(Error::invalid("K", "constant Hedge rate needs K >= 2"));
    }
    if planned_rounds == 0 || !(loss_range > 0.0) {
        return Err(Error::invalid(
            "planned_rounds",
            "horizon and loss range must be positive",
        ));
    }
    Ok((8.0 * (k as f64).ln() / (loss_range * loss_range * planned_rounds as f64)).sqrt())
}

/// Decreasing Hedge learning rate `c0 sqrt(log K / t)`.
pub fn decreasing_rate(t: usize, k: usize, c0: f64) -> Result<f64> {
    if t == 0 {
        return Err(Error::invalid("t", "rounds are 1-based"));
    }
    if k < 2 {
        return Err(Error::invalid("K", "log K must be positive, need K >= 2"));
    }
    if !(c0 > 0.0) {
        return Err(Error::invalid("c0", format!("must be positive, got {c0}")));
    }
    Ok(c0 * ((k as f64).ln() / t as f64).sqrt())
}

/// Doubling-trick phase for round `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DoublingPhase {
    pub phase: u32,
    pub eta: f64,
    /// True on the first round of a phase, where phase-local losses restart at zero.
    pub reset: bool,
}

/// Phase `r` covers rounds `[2^(r-1), 2^r - 1]` with `η_r = sqrt(8 log K / (S² 2^(r-1)))`.
pub fn doubling_schedule(t: usize, k: usize, loss_range: f64) -> DoublingPhase {
    assert!(t >= 1, "rounds are 1-based");
    // r = floor(log2 t) + 1 = ceil(log2(t + 1))
    let phase = usize::BITS - t.leading_zeros();
    let start = 1usize << (phase - 1);
    let len = start as f64;
    let eta = (8.0 * (k as f64).ln() / (loss_range * loss_range * len)).sqrt();
    DoublingPhase {
        phase,
        eta,
        reset: t == start,
    }
}

/// Exponential weights `∝ exp(-η (L_k - min L))`; `η = ∞` gives uniform mass on the argmin.
pub fn hedge_weights(cumulative: &[f64], eta: f64) -> Result<WeightVector> {
    if !(eta > 0.0) {
        return Err(Error::invalid("eta", format!("must be positive, got {eta}")));
    }
    let min = min_value(cumulative);
    if eta.is_infinite() {
        return Ok(WeightVector::uniform_over(
            cumulative.len(),
            &argmin_set(cumulative),
        ));
    }
    let masses = cumulative
        .iter()
        .map(|l| (-eta * (l - min)).exp())
        .collect();
    WeightVector::from_unnormalized(masses)
}

pub(crate) fn min_value(values: &[f64]) -> f64 {
    values.iter().copied().fold(f64::INFINITY, f64::min)
}

/// Indices attaining the minimum, by exact comparison.
pub fn argmin_set(values: &[f64]) -> Vec<usize> {
    let min = min_value(values);
    values
        .iter()
        .enumerate()
        .filter(|(_, v)| **v == min)
        .map(|(i, _)| i)
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
enum Memory {
    Static,
    RollingMse {
        window: usize,
        epsilon: f64,
        recent: VecDeque<Vec<f64>>,
    },
    Leader {
        leaders: Vec<usize>,
    },
    Constant {
        eta: f64,
    },
    Doubling {
        loss_range: f64,
        phase: u32,
        eta: f64,
        phase_cumulative: Vec<f64>,
    },
    Decreasing {
        c0: f64,
        eta: f64,
    },
    Adaptive(AdaHedgeMemory),
}

#[derive(Debug, Clone, PartialEq)]
struct AdaHedgeMemory {
    /// Cumulative mixability gap `∇`.
    gap: f64,
    /// Mix-loss accumulator `M` from the previous update.
    mix: f64,
    /// Rate behind the current weights; `f64::INFINITY` when `∇ = 0`.
    eta: f64,
    /// Mixability gap of the last round evaluated with a single rate on both sides.
    last_exact_gap: f64,
    last_increment: f64,
}

/// Sequential state of one combination scheme.
///
/// `weights()` always holds the weights for the *next* round; `update` feeds
/// the realized loss row of that round and advances.
#[derive(Debug, Clone, PartialEq)]
pub struct CombinerState {
    scheme: Scheme,
    experts: usize,
    round: usize,
    weights: WeightVector,
    cumulative: Vec<f64>,
    clamped: usize,
    memory: Memory,
}

impl CombinerState {
    pub fn new(config: &SchemeConfig, experts: usize) -> Result<Self> {
        if experts == 0 {
            return Err(Error::invalid("K", "need at least one expert"));
        }
        let memory = match *config {
            SchemeConfig::SimpleAverage => Memory::Static,
            SchemeConfig::RollingMse { window, epsilon } => {
                if window == 0 {
                    return Err(Error::invalid("window", "must be at least 1"));
                }
                if !(epsilon > 0.0) {
                    return Err(Error::invalid("epsilon", format!("must be > 0, got {epsilon}")));
                }
                Memory::RollingMse {
                    window,
                    epsilon,
                    recent: VecDeque::with_capacity(window),
                }
            }
            SchemeConfig::FollowTheLeader => Memory::Leader {
                leaders: (0..experts).collect(),
            },
            SchemeConfig::HedgeConstant { eta } => {
                if !(eta > 0.0) || !eta.is_finite() {
                    return Err(Error::invalid("eta", format!("must be positive, got {eta}")));
                }
                Memory::Constant { eta }
            }
            SchemeConfig::HedgeDoubling { loss_range } => {
                if !(loss_range > 0.0) {
                    return Err(Error::invalid("loss_range", "must be positive"));
                }
                let first = doubling_schedule(1, experts, loss_range);
                Memory::Doubling {
                    loss_range,
                    phase: first.phase,
                    eta: first.eta,
                    phase_cumulative: vec![0.0; experts],
                }
            }
            SchemeConfig::HedgeDecreasing { c0 } => {
                if !(c0 > 0.0) {
                    return Err(Error::invalid("c0", format!("must be positive, got {c0}")));
                }
                let eta = if experts >= 2 {
                    decreasing_rate(1, experts, c0)?
                } else {
                    f64::INFINITY
                };
                Memory::Decreasing { c0, eta }
            }
            SchemeConfig::AdaHedge => Memory::Adaptive(AdaHedgeMemory {
                gap: 0.0,
                mix: 0.0,
                eta: f64::INFINITY,
                last_exact_gap: 0.0,
                last_increment: 0.0,
            }),
        };
        Ok(Self {
            scheme: config.scheme(),
            experts,
            round: 0,
            weights: WeightVector::uniform(experts),
            cumulative: vec![0.0; experts],
            clamped: 0,
            memory,
        })
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn experts(&self) -> usize {
        self.experts
    }

    /// Number of loss rows absorbed so far.
    pub fn round(&self) -> usize {
        self.round
    }

    pub fn weights(&self) -> &WeightVector {
        &self.weights
    }

    pub fn cumulative_losses(&self) -> &[f64] {
        &self.cumulative
    }

    pub fn clamped_losses(&self) -> usize {
        self.clamped
    }

    /// Current FTL leader set, if this is an FTL state.
    pub fn leaders(&self) -> Option<&[usize]> {
        match &self.memory {
            Memory::Leader { leaders } => Some(leaders),
            _ => None,
        }
    }

    /// Learning rate behind the current weights, for the Hedge family.
    pub fn learning_rate(&self) -> Option<f64> {
        match &self.memory {
            Memory::Constant { eta } => Some(*eta),
            Memory::Doubling { eta, .. } => Some(*eta),
            Memory::Decreasing { eta, .. } => Some(*eta),
            Memory::Adaptive(m) => Some(m.eta),
            _ => None,
        }
    }

    /// AdaHedge cumulative mixability gap `∇`.
    pub fn mixability_gap(&self) -> Option<f64> {
        match &self.memory {
            Memory::Adaptive(m) => Some(m.gap),
            _ => None,
        }
    }

    /// AdaHedge: `(ℓ̄ − ΔM, exact mixability gap)` of the last update, before clamping.
    pub fn last_gap_increment(&self) -> Option<(f64, f64)> {
        match &self.memory {
            Memory::Adaptive(m) => Some((m.last_increment, m.last_exact_gap)),
            _ => None,
        }
    }

    pub fn doubling_phase(&self) -> Option<u32> {
        match &self.memory {
            Memory::Doubling { phase, .. } => Some(*phase),
            _ => None,
        }
    }

    /// Absorbs the realized losses of the current round and computes next-round weights.
    pub fn update(&mut self, losses: &[f64]) -> Result<()> {
        check_len("loss row", self.experts, losses.len())?;
        if losses.iter().any(|l| !l.is_finite()) {
            return Err(Error::NonFinite("loss row"));
        }
        let row: Vec<f64> = losses
            .iter()
            .map(|&l| clamp_loss(l, &mut self.clamped))
            .collect();
        let played = self.weights.clone();
        for (c, l) in self.cumulative.iter_mut().zip(&row) {
            *c += l;
        }
        self.round += 1;
        let next_round = self.round + 1;

        if self.experts == 1 {
            if let Memory::Adaptive(m) = &mut self.memory {
                m.mix = self.cumulative[0];
            }
            return Ok(());
        }

        self.weights = match &mut self.memory {
            Memory::Static => WeightVector::uniform(self.experts),
            Memory::RollingMse {
                window,
                epsilon,
                recent,
            } => {
                if recent.len() == *window {
                    recent.pop_front();
                }
                recent.push_back(row);
                rolling_mse_weights(recent, *epsilon)?
            }
            Memory::Leader { leaders } => {
                *leaders = argmin_set(&self.cumulative);
                WeightVector::uniform_over(self.experts, leaders)
            }
            Memory::Constant { eta } => {
                // instantaneous-loss recursion
                let masses = played
                    .as_slice()
                    .iter()
                    .zip(&row)
                    .map(|(w, l)| w * (-*eta * l).exp())
                    .collect();
                WeightVector::from_unnormalized(masses)?
            }
            Memory::Doubling {
                loss_range,
                phase,
                eta,
                phase_cumulative,
            } => {
                for (c, l) in phase_cumulative.iter_mut().zip(&row) {
                    *c += l;
                }
                let sched = doubling_schedule(next_round, self.experts, *loss_range);
                *phase = sched.phase;
                *eta = sched.eta;
                if sched.reset {
                    phase_cumulative.iter_mut().for_each(|c| *c = 0.0);
                }
                hedge_weights(phase_cumulative, sched.eta)?
            }
            Memory::Decreasing { c0, eta } => {
                *eta = decreasing_rate(next_round, self.experts, *c0)?;
                hedge_weights(&self.cumulative, *eta)?
            }
            Memory::Adaptive(m) => adahedge_step(m, &played, &row, &self.cumulative)?,
        };
        Ok(())
    }
}

fn rolling_mse_weights(recent: &VecDeque<Vec<f64>>, epsilon: f64) -> Result<WeightVector> {
    let k = recent[0].len();
    let n = recent.len() as f64;
    let masses = (0..k)
        .map(|j| {
            let mse = recent.iter().map(|r| r[j]).sum::<f64>() / n;
            1.0 / (mse + epsilon)
        })
        .collect();
    WeightVector::from_unnormalized(masses)
}

fn adahedge_step(
    m: &mut AdaHedgeMemory,
    played: &WeightVector,
    row: &[f64],
    cumulative: &[f64],
) -> Result<WeightVector> {
    let k = cumulative.len() as f64;
    let best = min_value(cumulative);
    let forecaster_loss = played.dot(row)?;

    let mix = if m.eta.is_infinite() {
        best
    } else {
        let sum: f64 = cumulative.iter().map(|l| (-m.eta * (l - best)).exp()).sum();
        best - (sum / k).ln() / m.eta
    };
    let increment = forecaster_loss - (mix - m.mix);
    m.last_increment = increment;
    m.last_exact_gap = forecaster_loss - mix_loss(played.as_slice(), row, m.eta);
    m.gap += increment.max(0.0);
    m.mix = mix;

    if m.gap == 0.0 {
        m.eta = f64::INFINITY;
    } else {
        m.eta = k.ln() / m.gap;
    }
    hedge_weights(cumulative, m.eta)
}

/// `-(1/η) log Σ ω_k exp(-η ℓ_k)`, with the `η = ∞` limit `min_{ω_k > 0} ℓ_k`.
pub fn mix_loss(weights: &[f64], losses: &[f64], eta: f64) -> f64 {
    let floor = weights
        .iter()
        .zip(losses)
        .filter(|(w, _)| **w > 0.0)
        .map(|(_, l)| *l)
        .fold(f64::INFINITY, f64::min);
    if eta.is_infinite() {
        return floor;
    }
    let sum: f64 = weights
        .iter()
        .zip(losses)
        .map(|(w, l)| w * (-eta * (l - floor)).exp())
        .sum();
    floor - sum.ln() / eta
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(config: &SchemeConfig, k: usize, rows: &[&[f64]]) -> CombinerState {
        let mut s = CombinerState::new(config, k).unwrap();
        for r in rows {
            s.update(r).unwrap();
        }
        s
    }

    #[test]
    fn ftl_unique_argmin() {
        let s = run(&SchemeConfig::FollowTheLeader, 3, &[&[1.0, 0.0, 1.0], &[1.0, 1.0, 1.0], &[1.0, 0.0, 0.0]]);
        assert_eq!(s.cumulative_losses(), &[3.0, 1.0, 2.0]);
        assert_eq!(s.weights().as_slice(), &[0.0, 1.0, 0.0]);
    }

    #[test]
    fn ftl_tie_split() {
        let s = run(&SchemeConfig::FollowTheLeader, 3, &[&[1.0, 1.0, 1.0], &[1.0, 1.0, 1.0], &[0.0, 0.0, 1.0], &[0.0, 0.0, 1.0], &[0.0, 0.0, 1.0]]);
        assert_eq!(s.cumulative_losses(), &[2.0, 2.0, 5.0]);
        assert_eq!(s.weights().as_slice(), &[0.5, 0.5, 0.0]);
    }

    #[test]
    fn ftl_trace_matches_hand_rolled_argmin() {
        let rows: [[f64; 2]; 3] = [[0.2, 0.8], [0.9, 0.1], [0.9, 0.1]];
        // oracle: running sums and argmin by hand
        let mut sums = [0.0f64; 2];
        let mut oracle_leaders = Vec::new();
        for r in &rows {
            sums[0] += r[0];
            sums[1] += r[1];
            oracle_leaders.push(if sums[0] < sums[1] { vec![0] } else if sums[1] < sums[0] { vec![1] } else { vec![0, 1] });
        }
        let mut s = CombinerState::new(&SchemeConfig::FollowTheLeader, 2).unwrap();
        assert_eq!(s.weights().as_slice(), &[0.5, 0.5]);
        let mut leaders = Vec::new();
        for r in &rows {
            s.update(r).unwrap();
            leaders.push(s.leaders().unwrap().to_vec());
        }
        assert_eq!(leaders, oracle_leaders);
        assert_eq!(leaders, vec![vec![0], vec![1], vec![1]]);
        assert_eq!(s.weights().as_slice(), &[0.0, 1.0]);
    }

    #[test]
    fn hedge_two_experts_ln2_gap() {
        let w = hedge_weights(&[0.0, 2f64.ln()], 1.0).unwrap();
        // oracle: exp(0) / (exp(0) + exp(-ln 2)) = 1 / 1.5
        assert!((w[0] - 2.0 / 3.0).abs() < 1e-15);
        assert!((w[1] - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn hedge_equal_losses_uniform() {
        for k in 1..8 {
            let w = hedge_weights(&vec![3.7; k], 0.9).unwrap();
            for i in 0..k {
                assert_eq!(w[i], 1.0 / k as f64);
            }
        }
    }

    #[test]
    fn hedge_large_eta_concentrates_on_leader() {
        let w = hedge_weights(&[1.0, 0.0, 2.0], 50.0).unwrap();
        let oracle = 1.0 / (1.0 + (-50f64).exp() + (-100f64).exp());
        assert!((w[1] - oracle).abs() < 1e-15);
        assert!(w[1] > 1.0 - 1e-10);
    }

    #[test]
    fn hedge_rejects_nonpositive_eta() {
        assert!(hedge_weights(&[0.0, 1.0], 0.0).is_err());
        assert!(hedge_weights(&[0.0, 1.0], -1.0).is_err());
        assert!(CombinerState::new(&SchemeConfig::HedgeConstant { eta: 0.0 }, 2).is_err());
    }

    #[test]
    fn decreasing_rate_values() {
        let r = decreasing_rate(4, 3, 2.0).unwrap();
        let oracle = 2.0 * (3f64.ln() / 4.0).sqrt();
        assert!((r - oracle).abs() < 1e-15);
        assert!((r - 1.04815).abs() < 1e-5);
        let r16 = decreasing_rate(16, 3, 2.0).unwrap();
        assert!((r16 - r / 2.0).abs() < 1e-15);
        assert_eq!(DEFAULT_C0, 2.0);
        assert_eq!(SchemeConfig::decreasing_hedge(), SchemeConfig::HedgeDecreasing { c0: 2.0 });
        assert!(decreasing_rate(1, 1, 2.0).is_err());
        let cfg: SchemeConfig = serde_json::from_str(r#"{"scheme":"hedge_decreasing"}"#).unwrap();
        assert_eq!(cfg, SchemeConfig::HedgeDecreasing { c0: 2.0 });
    }

    #[test]
    fn doubling_phases() {
        let p1 = doubling_schedule(1, 3, 1.0);
        assert_eq!((p1.phase, p1.reset), (1, true));
        assert!((p1.eta - (8.0 * 3f64.ln()).sqrt()).abs() < 1e-14);
        assert!((p1.eta - 2.964_608).abs() < 1e-6);
        let p4 = doubling_schedule(4, 3, 1.0);
        assert_eq!((p4.phase, p4.reset), (3, true));
        let p5 = doubling_schedule(5, 3, 1.0);
        assert_eq!((p5.phase, p5.reset), (3, false));
        // oracle: interval arithmetic [2^(r-1), 2^r - 1]
        for t in 1..200usize {
            let d = doubling_schedule(t, 3, 1.0);
            let lo = 1usize << (d.phase - 1);
            let hi = (1usize << d.phase) - 1;
            assert!(lo <= t && t <= hi);
            assert_eq!(d.reset, t == lo);
        }
    }

    #[test]
    fn doubling_resets_phase_losses() {
        let mut s = CombinerState::new(&SchemeConfig::HedgeDoubling { loss_range: 1.0 }, 2).unwrap();
        s.update(&[0.0, 1.0]).unwrap(); // round 1; round 2 starts phase 2
        assert_eq!(s.doubling_phase(), Some(2));
        assert_eq!(s.weights().as_slice(), &[0.5, 0.5]);
        s.update(&[0.0, 1.0]).unwrap(); // round 3 is inside phase 2
        assert!(s.weights()[0] > 0.5);
        s.update(&[0.0, 1.0]).unwrap(); // round 4 starts phase 3
        assert_eq!(s.weights().as_slice(), &[0.5, 0.5]);
        assert_eq!(s.cumulative_losses(), &[0.0, 3.0]);
    }

    #[test]
    fn adahedge_first_round_uniform() {
        let s = CombinerState::new(&SchemeConfig::AdaHedge, 4).unwrap();
        assert_eq!(s.weights().as_slice(), &[0.25; 4]);
        assert_eq!(s.mixability_gap(), Some(0.0));
        assert!(s.learning_rate().unwrap().is_infinite());
    }

    /// Literal transcription of the AdaHedge pseudo-code, used as an oracle.
    fn adahedge_oracle(rows: &[[f64; 2]]) -> Vec<(f64, [f64; 2], f64)> {
        let k = 2.0f64;
        let mut cum = [0.0f64; 2];
        let mut nabla = 0.0f64;
        let mut m_prev = 0.0f64;
        let mut out = Vec::new();
        for r in rows {
            let lstar = cum[0].min(cum[1]);
            let (eta, v) = if nabla == 0.0 {
                (f64::INFINITY, [(cum[0] == lstar) as u8 as f64, (cum[1] == lstar) as u8 as f64])
            } else {
                let eta = k.ln() / nabla;
                (eta, [(-eta * (cum[0] - lstar)).exp(), (-eta * (cum[1] - lstar)).exp()])
            };
            let vbar = v[0] + v[1];
            let w = [v[0] / vbar, v[1] / vbar];
            out.push((eta, w, nabla));
            cum[0] += r[0];
            cum[1] += r[1];
            let lstar1 = cum[0].min(cum[1]);
            let lbar = w[0] * r[0] + w[1] * r[1];
            let m_next = if eta.is_infinite() {
                lstar1
            } else {
                let vbar1 = (-eta * (cum[0] - lstar1)).exp() + (-eta * (cum[1] - lstar1)).exp();
                lstar1 - (vbar1 / k).ln() / eta
            };
            nabla += (lbar - (m_next - m_prev)).max(0.0);
            m_prev = m_next;
        }
        out
    }

    #[test]
    fn adahedge_two_round_trace() {
        let rows = [[0.0, 1.0], [1.0, 0.0]];
        let oracle = adahedge_oracle(&rows);
        let mut s = CombinerState::new(&SchemeConfig::AdaHedge, 2).unwrap();
        for (r, (eta, w, nabla)) in rows.iter().zip(&oracle) {
            let got_eta = s.learning_rate().unwrap();
            assert!(got_eta == *eta || (got_eta - eta).abs() < 1e-12);
            assert!((s.weights()[0] - w[0]).abs() < 1e-12);
            assert!((s.weights()[1] - w[1]).abs() < 1e-12);
            assert!((s.mixability_gap().unwrap() - nabla).abs() < 1e-12);
            s.update(r).unwrap();
        }
        // frozen values of the trace
        assert!(oracle[0].0.is_infinite());
        assert_eq!(oracle[0].1, [0.5, 0.5]);
        assert_eq!(oracle[1].2, 0.5);
        assert!((oracle[1].0 - 2.0 * 2f64.ln()).abs() < 1e-15);
        assert!((oracle[1].1[0] - 0.8).abs() < 1e-15);
        assert!((s.mixability_gap().unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(s.weights().as_slice(), &[0.5, 0.5]);
    }

    #[test]
    fn rollmse_single_row_window() {
        let s = run(&SchemeConfig::RollingMse { window: 1, epsilon: 1.0 }, 2, &[&[0.0, 1.0]]);
        // oracle: (1/(0+1)) / (1/1 + 1/2)
        let oracle = 1.0 / (1.0 + 0.5);
        assert!((s.weights()[0] - oracle).abs() < 1e-15);
        assert!((s.weights()[0] - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn rollmse_window_slides() {
        let s = run(&SchemeConfig::RollingMse { window: 2, epsilon: 1e-6 }, 2, &[&[1.0, 0.0], &[0.5, 0.5], &[0.5, 0.5]]);
        assert!((s.weights()[0] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn rollmse_initial_and_symmetric() {
        let s = CombinerState::new(&SchemeConfig::rolling_mse(), 3).unwrap();
        assert_eq!(s.weights().as_slice(), &[1.0 / 3.0; 3]);
        let s = run(&SchemeConfig::rolling_mse(), 3, &[&[0.4, 0.4, 0.4]]);
        for i in 0..3 {
            assert!((s.weights()[i] - 1.0 / 3.0).abs() < 1e-15);
        }
        assert!(CombinerState::new(&SchemeConfig::RollingMse { window: 4, epsilon: 0.0 }, 2).is_err());
    }

    #[test]
    fn simple_average_is_static() {
        let s = run(&SchemeConfig::SimpleAverage, 4, &[&[1.0, 0.0, 0.3, 0.2]]);
        assert_eq!(s.weights().as_slice(), &[0.25; 4]);
        let s = run(&SchemeConfig::SimpleAverage, 1, &[&[0.7]]);
        assert_eq!(s.weights().as_slice(), &[1.0]);
    }

    #[test]
    fn single_expert_every_scheme() {
        for cfg in all_configs() {
            let s = run(&cfg, 1, &[&[0.3], &[0.9]]);
            assert_eq!(s.weights().as_slice(), &[1.0]);
        }
    }

    pub(crate) fn all_configs() -> Vec<SchemeConfig> {
        vec![
            SchemeConfig::SimpleAverage,
            SchemeConfig::rolling_mse(),
            SchemeConfig::FollowTheLeader,
            SchemeConfig::HedgeConstant { eta: 0.7 },
            SchemeConfig::HedgeDoubling { loss_range: 1.0 },
            SchemeConfig::decreasing_hedge(),
            SchemeConfig::AdaHedge,
        ]
    }
}
