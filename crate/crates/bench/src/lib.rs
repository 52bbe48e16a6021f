//! Criterion benchmarks of the combiner, reservoir and readout hot paths.

use std::hint::black_box;

use criterion::{BatchSize, BenchmarkId, Criterion, Throughput};
use nalgebra::DMatrix;
use rand::Rng;

use mfesn_core::combiner::{replay, CombinerState, LossPanel, SchemeConfig};
use mfesn_core::readout::{default_lambda_grid, fit_ridge, select_lambda, CvConfig};
use mfesn_core::reservoir::{EsnState, HyperParams, ReservoirConfig, ReservoirSpec};
use mfesn_core::seeding::rng;

/// Uniform losses in `[0, 1]` for `experts` experts over `rounds` rounds.
pub fn loss_panel(experts: usize, rounds: usize, seed: u64) -> LossPanel {
    let mut r = rng(seed, 0);
    let rows: Vec<Vec<f64>> = (0..rounds)
        .map(|_| (0..experts).map(|_| r.random::<f64>()).collect())
        .collect();
    LossPanel::from_rows(experts, &rows).expect("losses lie in [0, 1]")
}

/// Gaussian state matrix and a noisy linear target.
pub fn regression(rows: usize, cols: usize, seed: u64) -> (DMatrix<f64>, Vec<f64>) {
    let mut r = rng(seed, 1);
    let x = DMatrix::from_fn(rows, cols, |_, _| r.random::<f64>() - 0.5);
    let y = (0..rows)
        .map(|i| x.row(i).iter().enumerate().map(|(j, v)| v / (j + 1) as f64).sum::<f64>() + 0.1 * r.random::<f64>())
        .collect();
    (x, y)
}

pub fn reservoir(dim_state: usize, dim_input: usize) -> ReservoirSpec {
    let hyper = HyperParams::new(0.1, 0.5, 1.0, 0.0).expect("valid hyperparameters");
    ReservoirSpec::sample(&ReservoirConfig::new(dim_state, dim_input, 10.0 / dim_state as f64, hyper, 7))
        .expect("reservoir draws")
}

fn schemes() -> Vec<SchemeConfig> {
    vec![
        SchemeConfig::SimpleAverage,
        SchemeConfig::rolling_mse(),
        SchemeConfig::FollowTheLeader,
        SchemeConfig::HedgeConstant { eta: 0.5 },
        SchemeConfig::decreasing_hedge(),
        SchemeConfig::AdaHedge,
    ]
}

fn combiner_update(c: &mut Criterion) {
    let mut group = c.benchmark_group("combiner_update");
    for k in [10, 100, 1000] {
        let panel = loss_panel(k, 64, 1);
        group.throughput(Throughput::Elements(panel.rounds() as u64));
        for scheme in schemes() {
            group.bench_with_input(BenchmarkId::new(scheme.scheme().slug(), k), &panel, |b, panel| {
                b.iter_batched(
                    || CombinerState::new(&scheme, k).expect("valid scheme"),
                    |mut state| {
                        for row in panel.rows() {
                            state.update(row).expect("finite losses");
                        }
                        state
                    },
                    BatchSize::SmallInput,
                )
            });
        }
    }
    group.finish();
}

fn combiner_replay(c: &mut Criterion) {
    let panel = loss_panel(100, 500, 2);
    c.bench_function("replay_adahedge_k100_t500", |b| {
        b.iter(|| replay(&SchemeConfig::AdaHedge, black_box(&panel)).expect("replay"))
    });
}

fn reservoir_step(c: &mut Criterion) {
    let mut group = c.benchmark_group("reservoir_step");
    for d in [30, 100, 300] {
        let spec = reservoir(d, 5);
        let input = [0.1, -0.2, 0.3, 0.0, 0.5];
        let mut state = EsnState::zeros(d);
        let mut scratch = nalgebra::DVector::zeros(d);
        group.bench_function(BenchmarkId::from_parameter(d), |b| {
            b.iter(|| {
                spec.step_in_place(&mut state, black_box(&input), &mut scratch)
                    .expect("finite input")
            })
        });
    }
    group.finish();
}

fn ridge_fit(c: &mut Criterion) {
    let mut group = c.benchmark_group("ridge");
    for d in [30, 120, 300] {
        let (x, y) = regression(80, d, 3);
        group.bench_with_input(BenchmarkId::new("fit", d), &(x.clone(), y.clone()), |b, (x, y)| {
            b.iter(|| fit_ridge(x, y, 1.0).expect("fit"))
        });
        let grid = default_lambda_grid();
        let cv = CvConfig::default();
        group.bench_with_input(BenchmarkId::new("cv_select", d), &(x, y), |b, (x, y)| {
            b.iter(|| select_lambda(x, y, &grid, &cv).expect("cv"))
        });
    }
    group.finish();
}

pub fn benchmarks(c: &mut Criterion) {
    combiner_update(c);
    combiner_replay(c);
    reservoir_step(c);
    ridge_fit(c);
}
