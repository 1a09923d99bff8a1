mod common;

use common::*;
use largevol::data::{absolute_volatility, mean_volatility, reverse, shuffle_surrogate};
use largevol::events::{select_events, EventSet};
use largevol::fitting::{bootstrap_errors, FitConfig};
use largevol::profiles::{cumulative, omori_counts, remanent_profile, signal_check, Side};
use largevol::synth::{gen_iid_gaussian, gen_planted_relaxation, KernelSide, PlantedRelaxationSpec};

#[test]
fn production_profile_matches_double_loop() {
    for seed in 0..3 {
        let vol = planted(5_000, 0.4, seed);
        let stats = mean_volatility(&vol).unwrap();
        let events = select_events(&vol, 3.0, &stats).unwrap();
        let p = remanent_profile(&vol, &events, 60).unwrap();
        let (vm, vp, cm, cp) = brute_profile(&vol.values, &events.indices(), 60);
        assert!(max_abs_diff(&p.v_minus, &vm) < 1e-12);
        assert!(max_abs_diff(&p.v_plus, &vp) < 1e-12);
        assert_eq!((p.counts_minus, p.counts_plus), (cm, cp));
        let cum = cumulative(&remanent_profile(&vol, &events, 60).unwrap());
        assert!(max_abs_diff(&cum.minus, &brute_cumulative(&vm)) < 1e-12);
        assert!(max_abs_diff(&cum.plus, &brute_cumulative(&vp)) < 1e-12);
    }
}

#[test]
fn omori_matches_double_loop() {
    let vol = planted(8_000, 0.3, 4);
    let stats = mean_volatility(&vol).unwrap();
    let mains = select_events(&vol, 10.0, &stats).unwrap();
    let o = omori_counts(&vol, &mains, 3.0, stats.sigma, 50).unwrap();
    let (m, p) = brute_omori(&vol.values, &mains.indices(), 3.0 * stats.sigma, 50);
    assert!(max_abs_diff(&o.n_minus, &m) < 1e-12);
    assert!(max_abs_diff(&o.n_plus, &p) < 1e-12);
}

#[test]
fn reversed_planted_series_swaps_sides() {
    let spec = PlantedRelaxationSpec::symmetric(50_000, 3.0, 0.3, 0.0, 8);
    let r = gen_planted_relaxation(&spec).unwrap().returns;
    let vol = absolute_volatility(&r);
    let rev = absolute_volatility(&reverse(&r));
    let stats = mean_volatility(&vol).unwrap();
    let ev = select_events(&vol, 6.0, &stats).unwrap();
    let a = remanent_profile(&vol, &ev, 200).unwrap();
    let b = remanent_profile(&rev, &ev.reindexed_for_reverse(vol.len()), 200).unwrap();
    assert!(max_abs_diff(&a.v_minus, &b.v_plus) < 1e-12);
    assert!(max_abs_diff(&a.v_plus, &b.v_minus) < 1e-12);
}

#[test]
fn symmetric_plant_gives_matching_sides() {
    let vol = planted(1_000_000, 0.3, 21);
    let stats = mean_volatility(&vol).unwrap();
    let ev = select_events(&vol, 10.0, &stats).unwrap();
    let p = remanent_profile(&vol, &ev, 100).unwrap();
    for t in 1..=100 {
        let se = (p.se_minus[t].powi(2) + p.se_plus[t].powi(2)).sqrt();
        assert!((p.v_minus[t] - p.v_plus[t]).abs() < 5.0 * se, "lag {t}");
    }
}

#[test]
fn zero_boost_plant_passes_null_test() {
    let spec = PlantedRelaxationSpec::symmetric(1_000_000, 0.0, 0.3, 0.0, 2);
    let vol = absolute_volatility(&gen_planted_relaxation(&spec).unwrap().returns);
    let stats = mean_volatility(&vol).unwrap();
    for m in [4.0, 10.0] {
        let ev = select_events(&vol, m, &stats).unwrap();
        let p = remanent_profile(&vol, &ev, 100).unwrap();
        for side in Side::BOTH {
            let check = signal_check(&p, side, 1..=100);
            assert!(check.mean_v.abs() < 0.01, "m {m} {side:?}: {}", check.mean_v);
        }
    }
}

#[test]
fn iid_null_is_flagged_as_zero_signal() {
    let vol = absolute_volatility(&gen_iid_gaussian(500_000, 1.0, 17));
    let stats = mean_volatility(&vol).unwrap();
    let ev = select_events(&vol, 3.0, &stats).unwrap();
    let p = remanent_profile(&vol, &ev, 100).unwrap();
    for side in Side::BOTH {
        assert!(signal_check(&p, side, 1..=100).consistent_with_zero());
    }
}

#[test]
fn planted_signal_is_flagged_as_nonzero() {
    let vol = planted(300_000, 0.3, 5);
    let stats = mean_volatility(&vol).unwrap();
    let ev = select_events(&vol, 10.0, &stats).unwrap();
    let p = remanent_profile(&vol, &ev, 100).unwrap();
    assert!(!signal_check(&p, Side::Plus, 1..=100).consistent_with_zero());
}

#[test]
fn shuffled_plant_loses_its_signal() {
    let spec = PlantedRelaxationSpec::symmetric(1_000_000, 3.0, 0.3, 0.0, 6);
    let r = shuffle_surrogate(&gen_planted_relaxation(&spec).unwrap().returns, 99);
    let vol = absolute_volatility(&r);
    let stats = mean_volatility(&vol).unwrap();
    let ev = select_events(&vol, 10.0, &stats).unwrap();
    let p = remanent_profile(&vol, &ev, 100).unwrap();
    for side in Side::BOTH {
        assert!(signal_check(&p, side, 1..=100).mean_v.abs() < 0.01);
    }
}

#[test]
fn planted_exponent_is_recovered() {
    for seed in 0..5 {
        let (pm, pp, n) = fitted_exponents(&planted(1_000_000, 0.3, seed), 10.0, 1000);
        assert!((300..800).contains(&n), "{n} events");
        assert!((pm - 0.3).abs() < 0.05 && (pp - 0.3).abs() < 0.05, "seed {seed}: {pm} {pp}");
        assert!((pm - pp).abs() < 0.03, "seed {seed}: {pm} {pp}");
    }
}

#[test]
fn omori_exponent_of_plant() {
    let vol = planted(1_000_000, 0.3, 12);
    let stats = mean_volatility(&vol).unwrap();
    let mains = select_events(&vol, 12.0, &stats).unwrap();
    let cfg = FitConfig::default();
    for m1 in [3.0, 4.0] {
        let o = omori_counts(&vol, &mains, m1, stats.sigma, 1000).unwrap();
        for side in Side::BOTH {
            let p = cfg.fit(o.side(side)).unwrap().exponent;
            assert!((p - 0.3).abs() < 0.1, "m1 {m1} {side:?}: {p}");
        }
    }
}

#[test]
fn asymmetric_plant_is_detected() {
    let spec = PlantedRelaxationSpec {
        before: KernelSide { boost: 3.0, exponent: 0.5, offset: 0.0 },
        ..PlantedRelaxationSpec::symmetric(1_000_000, 3.0, 0.3, 0.0, 44)
    };
    let vol = absolute_volatility(&gen_planted_relaxation(&spec).unwrap().returns);
    let (pm, pp, _) = fitted_exponents(&vol, 10.0, 1000);
    assert!(pm - pp > 0.1, "{pm} {pp}");
}

#[test]
fn bootstrap_error_shrinks_with_more_events() {
    let vol = planted(1_000_000, 0.3, 3);
    let stats = mean_volatility(&vol).unwrap();
    let ev: EventSet = select_events(&vol, 10.0, &stats).unwrap();
    let all = ev.indices();
    let quarter: Vec<usize> = all.iter().copied().step_by(4).collect();
    let cfg = FitConfig::default();
    let full = bootstrap_errors(&vol, &all, stats.sigma, 1000, &cfg, 100, 1).unwrap();
    let sub = bootstrap_errors(&vol, &quarter, stats.sigma, 1000, &cfg, 100, 1).unwrap();
    for side in Side::BOTH {
        let ratio = sub.stderr(side) / full.stderr(side);
        assert!((1.0..=3.0).contains(&ratio), "{side:?} ratio {ratio}");
    }
}
