use std::io::Write;

use serde::Serialize;

use super::schemes::{argmin_set, min_value};
use super::weights::WeightVector;
use crate::error::{check_len, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LedgerRow {
    pub round: usize,
    pub forecaster_cumloss: f64,
    pub best_cumloss: f64,
    pub regret: f64,
    pub leader_changes: usize,
    #[serde(skip)]
    pub loss_range: f64,
}

/// Running regret bookkeeping against the best expert in hindsight.
///
/// The leader set starts as all experts (every cumulative loss is zero), and a
/// leader change is counted in every round whose argmin set differs from the
/// one before it.
#[derive(Debug, Clone, PartialEq)]
pub struct RegretLedger {
    expert_cumloss: Vec<f64>,
    forecaster_cumloss: f64,
    best_cumloss: f64,
    cumulative_regret: f64,
    leader_changes: usize,
    max_loss_range: f64,
    sum_sq_range: f64,
    tie_rounds: usize,
    leaders: Vec<usize>,
    history: Vec<LedgerRow>,
}

impl RegretLedger {
    pub fn new(experts: usize) -> Self {
        assert!(experts > 0);
        Self {
            expert_cumloss: vec![0.0; experts],
            forecaster_cumloss: 0.0,
            best_cumloss: 0.0,
            cumulative_regret: 0.0,
            leader_changes: 0,
            max_loss_range: 0.0,
            sum_sq_range: 0.0,
            tie_rounds: 0,
            leaders: (0..experts).collect(),
            history: Vec::new(),
        }
    }

    pub fn record(&mut self, weights: &WeightVector, losses: &[f64]) -> Result<()> {
        check_len("ledger loss row", self.expert_cumloss.len(), losses.len())?;
        if losses.iter().any(|l| !l.is_finite()) {
            return Err(Error::NonFinite("ledger loss row"));
        }
        self.forecaster_cumloss += weights.dot(losses)?;
        for (c, l) in self.expert_cumloss.iter_mut().zip(losses) {
            *c += l;
        }
        self.best_cumloss = min_value(&self.expert_cumloss);
        self.cumulative_regret = self.forecaster_cumloss - self.best_cumloss;

        let hi = losses.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lo = min_value(losses);
        let range = hi - lo;
        self.max_loss_range = self.max_loss_range.max(range);
        self.sum_sq_range += range * range;

        let leaders = argmin_set(&self.expert_cumloss);
        if leaders != self.leaders {
            self.leader_changes += 1;
            self.leaders = leaders;
        }
        if self.leaders.len() > 1 {
            self.tie_rounds += 1;
        }

        self.history.push(LedgerRow {
            round: self.history.len() + 1,
            forecaster_cumloss: self.forecaster_cumloss,
            best_cumloss: self.best_cumloss,
            regret: self.cumulative_regret,
            leader_changes: self.leader_changes,
            loss_range: range,
        });
        Ok(())
    }

    pub fn rounds(&self) -> usize {
        self.history.len()
    }

    pub fn forecaster_cumloss(&self) -> f64 {
        self.forecaster_cumloss
    }

    pub fn best_cumloss(&self) -> f64 {
        self.best_cumloss
    }

    /// `R̄_t = L̄_t − min_k L_t^(k)`.
    pub fn regret(&self) -> f64 {
        self.cumulative_regret
    }

    /// `C_t`.
    pub fn leader_changes(&self) -> usize {
        self.leader_changes
    }

    /// `S_t = max_{τ ≤ t} (max_k ℓ_τ − min_k ℓ_τ)`.
    pub fn max_loss_range(&self) -> f64 {
        self.max_loss_range
    }

    /// `Σ_τ s_τ²`.
    pub fn sum_squared_ranges(&self) -> f64 {
        self.sum_sq_range
    }

    /// Rounds that ended with more than one expert tied for the lead.
    pub fn tie_rounds(&self) -> usize {
        self.tie_rounds
    }

    pub fn leaders(&self) -> &[usize] {
        &self.leaders
    }

    pub fn expert_cumloss(&self) -> &[f64] {
        &self.expert_cumloss
    }

    pub fn history(&self) -> &[LedgerRow] {
        &self.history
    }

    /// CSV with columns `round,forecaster_cumloss,best_cumloss,regret,leader_changes`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        for row in &self.history {
            w.serialize(row)?;
        }
        if self.history.is_empty() {
            w.write_record(["round", "forecaster_cumloss", "best_cumloss", "regret", "leader_changes"])?;
        }
        w.flush().map_err(|e| Error::io("regret csv", e))?;
        Ok(())
    }
}

/// CSV with columns `round,expert_id,weight`, one line per expert per round.
///
/// Rounds start at 1, expert ids at 0. Every vector is re-validated against the
/// simplex before anything is written.
pub fn write_weights_csv<W: Write>(writer: W, trajectory: &[WeightVector]) -> Result<()> {
    for (i, w) in trajectory.iter().enumerate() {
        w.validate()
            .map_err(|e| Error::Simplex(format!("round {}: {e}", i + 1)))?;
    }
    let mut out = csv::Writer::from_writer(writer);
    out.write_record(["round", "expert_id", "weight"])?;
    for (i, w) in trajectory.iter().enumerate() {
        for (k, v) in w.as_slice().iter().enumerate() {
            out.write_record([(i + 1).to_string(), k.to_string(), format!("{v:.17e}")])?;
        }
    }
    out.flush().map_err(|e| Error::io("weights csv", e))?;
    Ok(())
}
