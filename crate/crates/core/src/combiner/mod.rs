//! Online combination of expert forecasts.
//!
//! Each [`CombinerState`] is a single-writer state machine: it publishes the
//! weights for the upcoming round, then absorbs that round's realized loss
//! vector. Losses are expected in `[0, 1]`; anything outside is clamped and
//! counted rather than rejected.
//!
//! Supported schemes: simple averaging, rolling inverse-MSE, Follow-the-Leader,
//! constant / doubling-trick / decreasing Hedge, and AdaHedge.

mod ledger;
mod panel;
mod schemes;
mod weights;

pub use ledger::{write_weights_csv, LedgerRow, RegretLedger};
pub use panel::LossPanel;
pub use schemes::{
    argmin_set, decreasing_rate, doubling_schedule, hedge_weights, mix_loss,
    optimal_constant_rate, CombinerState, DoublingPhase, Scheme, SchemeConfig, DEFAULT_C0,
    DEFAULT_ROLL_EPSILON, DEFAULT_ROLL_WINDOW,
};
pub use weights::{combine_forecasts, WeightVector, SIMPLEX_TOL};

use crate::error::Result;

/// Plays `config` over a whole panel, returning the weights used at each round
/// and the resulting regret ledger.
pub fn replay(config: &SchemeConfig, panel: &LossPanel) -> Result<(Vec<WeightVector>, RegretLedger)> {
    let mut state = CombinerState::new(config, panel.experts())?;
    let mut ledger = RegretLedger::new(panel.experts());
    let mut trajectory = Vec::with_capacity(panel.rounds());
    for row in panel.rows() {
        trajectory.push(state.weights().clone());
        ledger.record(state.weights(), row)?;
        state.update(row)?;
    }
    Ok((trajectory, ledger))
}

/// Like [`replay`] but keeps only the ledger.
pub fn replay_regret(config: &SchemeConfig, panel: &LossPanel) -> Result<RegretLedger> {
    let mut state = CombinerState::new(config, panel.experts())?;
    let mut ledger = RegretLedger::new(panel.experts());
    for row in panel.rows() {
        ledger.record(state.weights(), row)?;
        state.update(row)?;
    }
    Ok(ledger)
}
