//! Independent reference implementations shared by the integration and
//! acceptance tests. None of these reuse the search, caching or recursion
//! code they are compared against.
#![allow(dead_code, clippy::needless_range_loop)]

use invmpc_core::{
    apply_transition, dynamics_for_mode, outputs, AffineDynamics, CircuitParams, ControlSymbol, HorizonConfig,
    PhaseState, StepMatrices, SwitchMode,
};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub type Rng8 = ChaCha8Rng;

pub fn rng(seed: u64) -> Rng8 {
    use rand::SeedableRng;
    ChaCha8Rng::seed_from_u64(seed)
}

/// A state in the operating envelope of the reference circuit. Mode m3
/// states respect the reset (`i1 = 0`).
pub fn random_state(rng: &mut Rng8) -> PhaseState {
    let mode = SwitchMode::ALL[rng.gen_range(0..3)];
    let i1 = if mode == SwitchMode::M3 { 0.0 } else { rng.gen_range(-15.0..15.0) };
    let x = [i1, rng.gen_range(-6.0..6.0), rng.gen_range(-450.0..450.0)];
    PhaseState::new(x, mode)
}

/// Classical fourth-order Runge-Kutta with `n` equal sub-steps.
pub fn rk4(dynamics: &AffineDynamics, x0: &[f64; 3], dt: f64, n: usize) -> [f64; 3] {
    let h = dt / n as f64;
    let add = |x: &[f64; 3], k: &[f64; 3], s: f64| [x[0] + s * k[0], x[1] + s * k[1], x[2] + s * k[2]];
    let mut x = *x0;
    for _ in 0..n {
        let k1 = dynamics.derivative(&x);
        let k2 = dynamics.derivative(&add(&x, &k1, h / 2.0));
        let k3 = dynamics.derivative(&add(&x, &k2, h / 2.0));
        let k4 = dynamics.derivative(&add(&x, &k3, h));
        for i in 0..3 {
            x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
    x
}

/// `max|a - b| / max(max|b|, floor)`.
pub fn rel_err(a: &[f64], b: &[f64], floor: f64) -> f64 {
    assert_eq!(a.len(), b.len());
    let diff = a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    let scale = b.iter().map(|y| y.abs()).fold(floor, f64::max);
    diff / scale
}

/// Sequence number `index` of the odometer enumeration (last symbol fastest).
pub fn odometer_sequence(index: usize, n: usize) -> Vec<ControlSymbol> {
    let mut digits = vec![ControlSymbol::One; n];
    let mut rest = index;
    for slot in digits.iter_mut().rev() {
        *slot = ControlSymbol::ALL[rest % 3];
        rest /= 3;
    }
    digits
}

/// Simulate `seq` sample by sample and return the predicted output voltages.
pub fn simulate_sequence(
    params: &CircuitParams,
    x0: &PhaseState,
    seq: &[ControlSymbol],
    w_hat: &[f64],
    cfg: &HorizonConfig,
) -> Vec<f64> {
    let dt = cfg.dt_sol();
    let mut state = *x0;
    let mut out = Vec::new();
    for (sym, w) in seq.iter().zip(w_hat) {
        let r = params.r_load_nominal + w;
        state = apply_transition(state, *sym);
        let step = StepMatrices::from_dynamics(&dynamics_for_mode(params, state.mode, r).unwrap(), dt).unwrap();
        for _ in 0..cfg.samples_per_beat() {
            state.x = step.apply(&state.x);
            out.push(outputs(params, &state, r).v_o);
        }
    }
    out
}

pub fn sum_sq_error(pred: &[f64], reference: &[f64]) -> f64 {
    pred.iter().zip(reference).fold(0.0, |acc, (p, r)| {
        let e = p - r;
        acc + e * e
    })
}

/// Plain loop over all `3^N` sequences, strict `<` keeps the first minimum.
pub fn brute_force_odcm(
    params: &CircuitParams,
    x0: &PhaseState,
    reference: &[f64],
    w_hat: &[f64],
    cfg: &HorizonConfig,
) -> (Vec<ControlSymbol>, f64) {
    let n = cfg.n_steps;
    let mut best = (Vec::new(), f64::INFINITY);
    for idx in 0..3usize.pow(n as u32) {
        let seq = odometer_sequence(idx, n);
        let cost = sum_sq_error(&simulate_sequence(params, x0, &seq, w_hat, cfg), reference);
        if cost < best.1 {
            best = (seq, cost);
        }
    }
    best
}

/// Solve `a x = b` by Gaussian elimination with partial pivoting.
pub fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap();
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    x
}

/// Exponentially weighted, regularized least-squares coefficients for the
/// windowed regression the estimator runs: regressor = first `m` samples of
/// each length-`m + n_e` window, targets = the following `n_e` samples.
///
/// Minimizes `sum_t lambda^(T-t) |d_t - R u_t|^2 + lambda^T / delta |R|_F^2`,
/// the cost whose exact minimizer the recursion tracks from `P0 = delta I`.
/// Returns `R` as `n_e x m` row-major.
pub fn batch_rls(samples: &[f64], m: usize, n_e: usize, delta: f64, lambda: f64) -> Vec<f64> {
    let windows: Vec<&[f64]> = samples.windows(m + n_e).collect();
    let t_total = windows.len();
    let mut gram = vec![vec![0.0; m]; m];
    let mut cross = vec![vec![0.0; n_e]; m];
    for (t, w) in windows.iter().enumerate() {
        let weight = lambda.powi((t_total - 1 - t) as i32);
        let (u, d) = w.split_at(m);
        for i in 0..m {
            for j in 0..m {
                gram[i][j] += weight * u[i] * u[j];
            }
            for j in 0..n_e {
                cross[i][j] += weight * u[i] * d[j];
            }
        }
    }
    let reg = lambda.powi(t_total as i32) / delta;
    for (i, row) in gram.iter_mut().enumerate() {
        row[i] += reg;
    }
    let mut r = vec![0.0; n_e * m];
    for out in 0..n_e {
        let rhs: Vec<f64> = (0..m).map(|i| cross[i][out]).collect();
        let coeffs = solve_dense(gram.clone(), rhs);
        r[out * m..(out + 1) * m].copy_from_slice(&coeffs);
    }
    r
}

/// Symmetric within `sym_tol` (relative) and Cholesky-factorizable.
pub fn is_spd(p: &[f64], m: usize, sym_tol: f64) -> bool {
    let scale = p.iter().map(|v| v.abs()).fold(0.0, f64::max);
    for i in 0..m {
        for j in 0..i {
            if (p[i * m + j] - p[j * m + i]).abs() > sym_tol * scale {
                return false;
            }
        }
    }
    let mut l = vec![0.0; m * m];
    for i in 0..m {
        for j in 0..=i {
            // Factor the symmetric part.
            let a = 0.5 * (p[i * m + j] + p[j * m + i]);
            let s: f64 = (0..j).map(|k| l[i * m + k] * l[j * m + k]).sum();
            if i == j {
                let d = a - s;
                if d.is_nan() || d <= 0.0 {
                    return false;
                }
                l[i * m + i] = d.sqrt();
            } else {
                l[i * m + j] = (a - s) / l[j * m + j];
            }
        }
    }
    true
}
