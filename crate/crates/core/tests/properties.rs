use mfesn_core::combiner::{hedge_weights, mix_loss, replay, CombinerState, LossPanel, SchemeConfig};
use mfesn_core::dataio::{apply_transform, integrate_differences, Frequency, RawSeries};
use mfesn_core::mfesn::{fit_mfesn, msfe, ReservoirTemplate, Span};
use mfesn_core::readout::fit_ridge;
use mfesn_core::reservoir::{EsnState, HyperParams, ReservoirConfig, ReservoirSpec};
use mfesn_core::{combine_forecasts, FrequencyGroup, MfesnTemplate, MultiFreqSeries, WeightVector};
use nalgebra::DMatrix;
use proptest::prelude::*;

fn all_schemes(k: usize) -> Vec<SchemeConfig> {
    let mut s = SchemeConfig::standard_set(k, 50).unwrap();
    s.push(SchemeConfig::HedgeDoubling { loss_range: 1.0 });
    s.push(SchemeConfig::HedgeConstant { eta: 3.0 });
    s
}

fn panel_strategy(max_k: usize, max_t: usize, lo: f64, hi: f64) -> impl Strategy<Value = (usize, Vec<Vec<f64>>)> {
    (1..=max_k, 1..=max_t).prop_flat_map(move |(k, t)| {
        (Just(k), prop::collection::vec(prop::collection::vec(lo..hi, k), t))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn weights_stay_on_simplex((k, rows) in panel_strategy(8, 40, -0.5, 1.5)) {
        for config in all_schemes(k) {
            let mut s = CombinerState::new(&config, k).unwrap();
            prop_assert!(s.weights().validate().is_ok());
            for r in &rows {
                s.update(r).unwrap();
                prop_assert!(s.weights().validate().is_ok(), "{config:?}");
            }
        }
    }

    #[test]
    fn hedge_is_shift_invariant(
        losses in prop::collection::vec(0.0f64..50.0, 1..8),
        shift in -100.0f64..100.0,
        eta in 0.01f64..20.0,
    ) {
        let a = hedge_weights(&losses, eta).unwrap();
        let shifted: Vec<f64> = losses.iter().map(|l| l + shift).collect();
        let b = hedge_weights(&shifted, eta).unwrap();
        for (x, y) in a.as_slice().iter().zip(b.as_slice()) {
            prop_assert!((x - y).abs() < 1e-9);
        }
    }

    #[test]
    fn large_eta_approaches_leader(losses in prop::collection::vec(0u32..20, 2..8)) {
        let l: Vec<f64> = losses.iter().map(|v| f64::from(*v) * 0.01).collect();
        let limit = hedge_weights(&l, f64::INFINITY).unwrap();
        let near = hedge_weights(&l, 1e5).unwrap();
        for (x, y) in limit.as_slice().iter().zip(near.as_slice()) {
            prop_assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn multiplicative_recursion_matches_closed_form(
        (k, rows) in panel_strategy(6, 60, 0.0, 1.0),
        eta in 0.05f64..5.0,
    ) {
        let mut s = CombinerState::new(&SchemeConfig::HedgeConstant { eta }, k).unwrap();
        for r in &rows {
            s.update(r).unwrap();
        }
        let closed = hedge_weights(s.cumulative_losses(), eta).unwrap();
        for (x, y) in s.weights().as_slice().iter().zip(closed.as_slice()) {
            prop_assert!((x - y).abs() < 1e-9);
        }
    }

    #[test]
    fn schemes_are_permutation_equivariant(
        (k, rows) in panel_strategy(6, 30, 0.0, 1.0),
        rot in 0usize..6,
    ) {
        let perm: Vec<usize> = (0..k).map(|i| (i + rot) % k).collect();
        for config in all_schemes(k) {
            let mut a = CombinerState::new(&config, k).unwrap();
            let mut b = CombinerState::new(&config, k).unwrap();
            for r in &rows {
                a.update(r).unwrap();
                let permuted: Vec<f64> = perm.iter().map(|&j| r[j]).collect();
                b.update(&permuted).unwrap();
                for (i, &j) in perm.iter().enumerate() {
                    prop_assert!((b.weights()[i] - a.weights()[j]).abs() < 1e-12, "{config:?}");
                }
            }
        }
    }

    #[test]
    fn mix_loss_below_weighted_loss(
        (k, rows) in panel_strategy(6, 1, 0.0, 1.0),
        raw in prop::collection::vec(0.01f64..1.0, 6),
        eta in 0.01f64..50.0,
    ) {
        let w = WeightVector::from_unnormalized(raw[..k].to_vec()).unwrap();
        let dot = w.dot(&rows[0]).unwrap();
        prop_assert!(mix_loss(w.as_slice(), &rows[0], eta) <= dot + 1e-12);
    }

    #[test]
    fn adahedge_gap_increments_nonnegative((k, rows) in panel_strategy(6, 40, 0.0, 1.0)) {
        let mut s = CombinerState::new(&SchemeConfig::AdaHedge, k).unwrap();
        for r in &rows {
            s.update(r).unwrap();
            if k > 1 {
                let (_, exact) = s.last_gap_increment().unwrap();
                prop_assert!(exact >= -1e-12);
            }
        }
    }

    #[test]
    fn ftl_regret_below_range_times_leader_changes((k, rows) in panel_strategy(6, 60, 0.0, 1.0)) {
        let panel = LossPanel::from_rows(k, &rows).unwrap();
        let (_, ledger) = replay(&SchemeConfig::FollowTheLeader, &panel).unwrap();
        let mut s_max = 0.0f64;
        for (row, h) in rows.iter().zip(ledger.history()) {
            let range = row.iter().cloned().fold(f64::MIN, f64::max) - row.iter().cloned().fold(f64::MAX, f64::min);
            s_max = s_max.max(range);
            prop_assert!(h.regret <= s_max * h.leader_changes as f64 + 1e-9);
        }
    }

    #[test]
    fn simple_average_beats_worst_expert(
        targets in prop::collection::vec(-5.0f64..5.0, 1..30),
        errors in prop::collection::vec(prop::collection::vec(-3.0f64..3.0, 30), 2..6),
    ) {
        let k = errors.len();
        let n = targets.len();
        let forecasts: Vec<Vec<f64>> = errors.iter().map(|e| (0..n).map(|t| targets[t] + e[t]).collect()).collect();
        let w = WeightVector::uniform(k);
        let combined: Vec<f64> = (0..n)
            .map(|t| combine_forecasts(&w, &forecasts.iter().map(|f| f[t]).collect::<Vec<_>>()).unwrap())
            .collect();
        let worst = forecasts.iter().map(|f| msfe(f, &targets)).fold(0.0, f64::max);
        prop_assert!(msfe(&combined, &targets) <= worst + 1e-12);
    }

    #[test]
    fn states_stay_in_unit_cube(
        seed in any::<u64>(),
        d in 1usize..20,
        alpha in 0.0f64..0.99,
        rho in 0.01f64..3.0,
        gamma in 0.0f64..5.0,
        inputs in prop::collection::vec(-100.0f64..100.0, 60),
    ) {
        let hyper = HyperParams::new(alpha, rho, gamma, 1.0).unwrap();
        let spec = ReservoirSpec::sample(&ReservoirConfig::new(d, 2, 0.5, hyper, seed)).unwrap();
        let mut x = EsnState::zeros(d);
        for z in inputs.chunks(2) {
            x = spec.step(&x, z).unwrap();
            prop_assert!(x.as_slice().iter().all(|v| v.abs() <= 1.0));
        }
    }

    #[test]
    fn leak_bounds_the_move(
        seed in any::<u64>(),
        eps in 1e-9f64..0.5,
        x0 in prop::collection::vec(-1.0f64..1.0, 5),
        z in prop::collection::vec(-10.0f64..10.0, 3),
    ) {
        let hyper = HyperParams::new(1.0 - eps, 0.9, 1.0, 0.0).unwrap();
        let spec = ReservoirSpec::sample(&ReservoirConfig::new(5, 3, 0.6, hyper, seed)).unwrap();
        let x = EsnState::from_vec(x0.clone());
        let next = spec.step(&x, &z).unwrap();
        for (a, b) in next.as_slice().iter().zip(&x0) {
            prop_assert!((a - b).abs() <= 2.0 * eps + 1e-15);
        }
    }

    #[test]
    fn ridge_first_order_conditions(
        (n, d) in (3usize..30, 1usize..6),
        seed in any::<u64>(),
        lambda in 0.01f64..100.0,
    ) {
        use rand::Rng;
        let mut r = mfesn_core::seeding::rng(seed, 0);
        let x = DMatrix::from_fn(n, d, |_, _| r.random_range(-1.0..1.0));
        let y: Vec<f64> = (0..n).map(|_| r.random_range(-1.0..1.0)).collect();
        let fit = fit_ridge(&x, &y, lambda).unwrap();
        let xm: Vec<f64> = (0..d).map(|j| x.column(j).mean()).collect();
        let ym = y.iter().sum::<f64>() / n as f64;
        let intercept = ym - xm.iter().zip(&fit.weights).map(|(a, b)| a * b).sum::<f64>();
        prop_assert!((fit.intercept - intercept).abs() < 1e-10);
        for j in 0..d {
            let mut g = 0.0;
            for i in 0..n {
                let pred: f64 = (0..d).map(|c| (x[(i, c)] - xm[c]) * fit.weights[c]).sum();
                g += (x[(i, j)] - xm[j]) * ((y[i] - ym) - pred);
            }
            prop_assert!((g - lambda * fit.weights[j]).abs() < 1e-9 * (1.0 + g.abs()));
        }
        let heavier = fit_ridge(&x, &y, lambda * 2.0).unwrap();
        let norm = |w: &[f64]| w.iter().map(|v| v * v).sum::<f64>();
        prop_assert!(norm(&heavier.weights) <= norm(&fit.weights) + 1e-15);
    }

    #[test]
    fn differencing_round_trips(values in prop::collection::vec(-1e3f64..1e3, 2..50)) {
        let obs = values
            .iter()
            .enumerate()
            .map(|(i, v)| (chrono::NaiveDate::from_ymd_opt(2000, 1, 1).unwrap() + chrono::Duration::days(i as i64), *v))
            .collect();
        let s = RawSeries::new("x", Frequency::Daily, 2, obs).unwrap();
        let diffs: Vec<f64> = apply_transform(&s).unwrap().into_iter().map(|o| o.1).collect();
        let back = integrate_differences(values[0], &diffs);
        for (a, b) in back.iter().zip(&values) {
            prop_assert!((a - b).abs() <= 1e-9 * (1.0 + b.abs()));
        }
    }
}

fn toy(periods: usize, shift: f64, from: usize) -> MultiFreqSeries {
    let vals: Vec<f64> = (0..periods * 3)
        .map(|i| (i as f64 * 0.31).sin() + if i / 3 > from { shift } else { 0.0 })
        .collect();
    let target = (0..periods)
        .map(|t| (t as f64 * 0.93).cos() + if t > from { shift } else { 0.0 })
        .collect();
    MultiFreqSeries::new(target, vec![FrequencyGroup::new("m", 3, 1, vals).unwrap()], vec![]).unwrap()
}

#[test]
fn forecasts_ignore_future_data() {
    let template = MfesnTemplate::single(ReservoirTemplate::new(6, 1.0, HyperParams::new(0.2, 0.5, 1.0, 0.0).unwrap()));
    let data = toy(40, 0.0, 0);
    let model = fit_mfesn(&template, 5, &data, Span::new(1, 28).unwrap()).unwrap();
    let base = model.forecast_path(&data).unwrap();
    let cut = 30;
    let altered = model.forecast_path(&toy(40, 7.0, cut)).unwrap();
    assert_eq!(base[..=cut], altered[..=cut]);
    assert_ne!(base[cut + 1], altered[cut + 1]);
}

#[test]
fn ftl_follows_regime_switch_with_bounded_delay() {
    use rand::Rng;
    let (t_total, half) = (400, 200);
    let mut r = mfesn_core::seeding::rng(11, 0);
    let rows: Vec<Vec<f64>> = (0..t_total)
        .map(|t| {
            let (good, bad) = if t < half { (0, 1) } else { (1, 0) };
            let mut row = vec![0.0; 2];
            row[good] = 0.1 + 0.1 * r.random::<f64>();
            row[bad] = 0.7 + 0.2 * r.random::<f64>();
            row
        })
        .collect();
    // oracle: exhaustive cumulative-loss trace
    let mut cum = [0.0f64; 2];
    let mut oracle_switch = None;
    for (t, row) in rows.iter().enumerate() {
        cum[0] += row[0];
        cum[1] += row[1];
        if t >= half && oracle_switch.is_none() && cum[1] < cum[0] {
            oracle_switch = Some(t + 1);
        }
    }
    let panel = LossPanel::from_rows(2, &rows).unwrap();
    let (weights, _) = replay(&SchemeConfig::FollowTheLeader, &panel).unwrap();
    let switch = weights.iter().position(|w| w[1] == 1.0 && w[0] == 0.0).unwrap();
    assert_eq!(Some(switch), oracle_switch);
    // the new leader needs to recover a gap of at most 0.8 per round at a rate of at least 0.4
    assert!(switch - half <= 2 * half);
    assert!(switch > half);
}
