mod support;

use invmpc_core::{RlsConfig, RlsState};
use rand::Rng;
use support::{batch_rls, is_spd, rel_err, rng};

fn stream(rng: &mut support::Rng8, len: usize) -> Vec<f64> {
    // A load-shift-like signal: piecewise level plus a slow ripple and noise.
    let mut level = 0.0;
    (0..len)
        .map(|k| {
            if k % 300 == 0 {
                level = rng.gen_range(-60.0..60.0);
            }
            level + 3.0 * (k as f64 * 0.05).sin() + rng.gen_range(-1.0..1.0)
        })
        .collect()
}

fn check_against_batch(cfg: RlsConfig, seed: u64) {
    let mut rng = rng(seed);
    let samples = stream(&mut rng, 1200);
    let mut rls = RlsState::new(cfg).unwrap();
    let warm = cfg.m + cfg.n_e;
    for (k, s) in samples.iter().enumerate() {
        rls.update(*s).unwrap();
        let updates = (k + 1).saturating_sub(warm - 1);
        if updates >= 100 && updates % 100 == 0 {
            let oracle = batch_rls(&samples[..=k], cfg.m, cfg.n_e, cfg.delta, cfg.lambda);
            let e = rel_err(rls.coefficients(), &oracle, 1e-12);
            assert!(e < 1e-6, "after {updates} updates: rel err {e:e}");
        }
    }
}

#[test]
fn recursion_matches_batch_least_squares() {
    check_against_batch(RlsConfig::baseline(), 41);
}

#[test]
fn recursion_with_forgetting_matches_weighted_batch() {
    check_against_batch(RlsConfig { lambda: 0.995, m: 4, n_e: 3, ..RlsConfig::baseline() }, 42);
}

#[test]
fn inverse_correlation_stays_positive_definite() {
    let cfg = RlsConfig::baseline();
    let mut rls = RlsState::new(cfg).unwrap();
    let mut rng = rng(43);
    for s in stream(&mut rng, 10_000) {
        rls.update(s).unwrap();
        assert!(is_spd(rls.inverse_correlation(), cfg.m, 1e-9));
    }
}

#[test]
fn forecast_applies_coefficients_to_latest_samples() {
    let cfg = RlsConfig::baseline();
    let mut rls = RlsState::new(cfg).unwrap();
    let mut rng = rng(44);
    let samples = stream(&mut rng, 200);
    for s in &samples {
        rls.update(*s).unwrap();
    }
    let latest = &samples[samples.len() - cfg.m..];
    for (i, f) in rls.forecast().iter().enumerate() {
        let row = &rls.coefficients()[i * cfg.m..(i + 1) * cfg.m];
        let want: f64 = row.iter().zip(latest).map(|(a, b)| a * b).sum();
        assert!((f - want).abs() <= 1e-12 * want.abs().max(1.0));
    }
}
