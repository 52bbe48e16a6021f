//! Forecast combination for ensembles of (multi-frequency) echo state networks.
//!
//! The crate is organised around the pipeline it serves:
//!
//! - [`dataio`] reads mixed-frequency CSV series, applies the usual
//!   stationarity transforms and lines everything up on a quarterly grid.
//! - [`reservoir`] samples and iterates leaky ESN reservoirs.
//! - [`readout`] fits the centered ridge readout and picks its penalty by
//!   expanding-window cross-validation.
//! - [`mfesn`] builds single- and multi-reservoir MFESNs, their randomized
//!   ensembles, and runs the online forecasting exercise.
//! - [`combiner`] holds the online weighting schemes and regret bookkeeping.
//! - [`bounds`] evaluates the closed-form regret bounds and simulates loss
//!   processes to check them.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod combiner;
pub mod dataio;
mod error;
pub mod linalg;
pub mod mfesn;
pub mod readout;
pub mod reservoir;
pub mod seeding;
pub mod synthetic;

pub use combiner::{
    combine_forecasts, CombinerState, LossPanel, RegretLedger, Scheme, SchemeConfig,
    WeightVector,
};
pub use error::{Error, Result};
pub use mfesn::{
    Architecture, EnsembleFamily, EnsembleSpec, FrequencyGroup, MfesnModel, MfesnTemplate,
    MultiFreqSeries,
};
pub use readout::ReadoutCoefficients;
pub use reservoir::{EsnState, HyperParams, ReservoirConfig, ReservoirSpec};
