mod common;

use proptest::prelude::*;
use saompower::perturb::{add_joiner_slots, build_turnover_schedule, TurnoverPolicy};
use saompower::simulator::{simulate_panel, simulate_period};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn fixed_seed_reproduces_the_period(seed in any::<u64>(), n in 5usize..20) {
        let start = common::random_state(n, 0.2, &mut common::rng(seed));
        let model = common::coevolution_model(1.0, 0.5);
        let a = simulate_period(&start, &model, 0, &[], &mut common::rng(seed ^ 1)).unwrap();
        let b = simulate_period(&start, &model, 0, &[], &mut common::rng(seed ^ 1)).unwrap();
        prop_assert_eq!(a.0, b.0);
    }

    #[test]
    fn turnover_keeps_group_size_and_freezes_leavers(seed in any::<u64>(), n in 8usize..20, k in 1usize..4) {
        let mut rng = common::rng(seed);
        let base = common::random_state(n, 0.15, &mut rng);
        let waves = 3;
        let state = add_joiner_slots(&base, k * (waves - 1)).unwrap();
        let policy = TurnoverPolicy { per_group_count: k, time: 0.5 };
        // schedule every period up front from the projected presence
        let mut present = state.present.clone();
        let mut composition = Vec::new();
        for m in 0..waves - 1 {
            let slots: Vec<usize> = (n + m * k..n + (m + 1) * k).collect();
            let events = build_turnover_schedule(&present, &slots, &policy, &mut rng).unwrap();
            for ev in &events {
                for &l in &ev.leavers { present[l] = false; }
                for j in &ev.joiners { present[j.actor] = true; }
            }
            composition.push(events);
        }
        let model = common::coevolution_model(0.5, 0.3);
        let panel = simulate_panel(&state, &model, waves, &composition, "g", &mut rng).unwrap();
        for w in &panel.waves {
            prop_assert_eq!(w.present.iter().filter(|&&p| p).count(), n);
        }
        for (m, events) in panel.composition.iter().enumerate() {
            for ev in events {
                for &l in &ev.leavers {
                    for w in &panel.waves[m + 1..] {
                        prop_assert!(!w.present[l]);
                        prop_assert_eq!(w.network.out_degree(l) + w.network.in_degree(l), 0);
                    }
                }
                for j in &ev.joiners {
                    prop_assert!(!panel.waves[m].present[j.actor]);
                    prop_assert_eq!(panel.waves[m].network.out_degree(j.actor) + panel.waves[m].network.in_degree(j.actor), 0);
                    prop_assert!(panel.waves[m + 1].present[j.actor]);
                }
            }
        }
    }
}

#[test]
fn joiners_enter_as_isolates_when_no_ministeps_follow() {
    let mut rng = common::rng(3);
    let base = common::random_state(10, 0.3, &mut rng);
    let state = add_joiner_slots(&base, 2).unwrap();
    let policy = TurnoverPolicy {
        per_group_count: 2,
        time: 0.5,
    };
    let events = build_turnover_schedule(&state.present, &[10, 11], &policy, &mut rng).unwrap();
    let mut model = common::coevolution_model(0.0, 0.0);
    model.network_rate = vec![0.0];
    model.behavior_rate = vec![0.0];
    let (end, realised) = simulate_period(&state, &model, 0, &events, &mut rng).unwrap();
    for j in &realised[0].joiners {
        assert!(end.present[j.actor]);
        assert_eq!(end.network.out_degree(j.actor) + end.network.in_degree(j.actor), 0);
        assert!(j.behavior.is_some());
    }
}

#[test]
fn null_focal_effects_leave_behavior_uncorrelated_with_degree() {
    let model = common::coevolution_model(0.0, 0.0);
    let reps = 300;
    let corr: Vec<f64> = (0..reps)
        .map(|r| {
            let mut rng = common::rng(1000 + r);
            let start = common::random_state(25, 0.1, &mut rng);
            let (end, _) = simulate_period(&start, &model, 0, &[], &mut rng).unwrap();
            let n = end.n();
            let z: Vec<f64> = end.behavior.values().iter().map(|&v| f64::from(v)).collect();
            let d: Vec<f64> = (0..n).map(|i| end.network.in_degree(i) as f64).collect();
            pearson(&z, &d)
        })
        .filter(|c| c.is_finite())
        .collect();
    let m = corr.len() as f64;
    let mean = corr.iter().sum::<f64>() / m;
    let sd = (corr.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (m - 1.0)).sqrt();
    assert!(mean.abs() < 2.0 * sd / m.sqrt(), "mean {mean} se {}", sd / m.sqrt());
}

#[test]
fn positive_selection_creates_correlation_the_null_lacks() {
    // sanity check that the statistic above can detect dependence
    let model = common::coevolution_model(2.5, 0.0);
    let mut same = 0.0;
    let mut total = 0.0;
    for r in 0..40 {
        let mut rng = common::rng(5000 + r);
        let start = common::random_state(25, 0.0, &mut rng);
        let (end, _) = simulate_period(&start, &model, 0, &[], &mut rng).unwrap();
        for (i, j) in end.network.edges() {
            total += 1.0;
            if end.behavior.get(i) == end.behavior.get(j) {
                same += 1.0;
            }
        }
    }
    // five equiprobable values give 0.2 agreement without selection
    assert!(same / total > 0.3, "{}", same / total);
}

fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    sxy / (sxx * syy).sqrt()
}
