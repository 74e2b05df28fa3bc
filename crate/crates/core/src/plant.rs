//! True-plant propagation.
//!
//! Between controller events the active mode's dynamics are affine and time
//! invariant, so each solver step is taken exactly:
//!
//! ```text
//! exp(dt * [[A, b], [0, 0]]) = [[Phi, Gamma], [0, 1]],   x(t + dt) = Phi x(t) + Gamma
//! ```

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::circuit::{dynamics_for_mode, AffineDynamics, CircuitParams, PhaseState, SwitchMode};
use crate::error::{Error, Result};
use crate::linalg::{expm4, mat3_vec, Mat3, Vec3};

/// Solver clock. `f_sol` must be an integer multiple of the controller clock.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub f_sol: f64,
}

impl SolverConfig {
    pub fn new(f_sol: f64) -> Result<Self> {
        if f_sol.is_finite() && f_sol > 0.0 {
            Ok(Self { f_sol })
        } else {
            Err(Error::InvalidConfig("solver frequency must be positive"))
        }
    }

    pub fn dt(&self) -> f64 {
        1.0 / self.f_sol
    }

    /// Number of solver steps per controller beat at `f_c`.
    pub fn steps_per(&self, f_c: f64) -> Result<usize> {
        integer_ratio(self.f_sol, f_c)
            .ok_or(Error::InvalidConfig("solver frequency must be an integer multiple of the controller frequency"))
    }
}

/// `num / den` when it is a positive integer (to within rounding).
pub(crate) fn integer_ratio(num: f64, den: f64) -> Option<usize> {
    if !(num.is_finite() && den.is_finite() && num > 0.0 && den > 0.0) {
        return None;
    }
    let ratio = num / den;
    let rounded = libm::round(ratio);
    if rounded >= 1.0 && (ratio - rounded).abs() <= 1e-9 * rounded {
        Some(rounded as usize)
    } else {
        None
    }
}

/// Load-resistance shift `delta_r` over the half-open interval `[t_start, t_end)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoadShift {
    pub t_start: f64,
    pub t_end: f64,
    pub delta_r: f64,
}

/// Piecewise-constant load shift; zero outside every interval.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DisturbanceProfile {
    intervals: Vec<LoadShift>,
}

impl DisturbanceProfile {
    pub fn new(intervals: Vec<LoadShift>) -> Result<Self> {
        for iv in &intervals {
            if !(iv.t_start.is_finite() && iv.t_end.is_finite() && iv.delta_r.is_finite()) {
                return Err(Error::InvalidConfig("disturbance interval must be finite"));
            }
            if iv.t_end <= iv.t_start {
                return Err(Error::InvalidConfig("disturbance interval must have t_end > t_start"));
            }
        }
        for pair in intervals.windows(2) {
            if pair[1].t_start < pair[0].t_end {
                return Err(Error::InvalidConfig("disturbance intervals must be sorted and disjoint"));
            }
        }
        Ok(Self { intervals })
    }

    pub fn none() -> Self {
        Self::default()
    }

    /// +50 % of the nominal load on [0.02, 0.05) s, −50 % on [0.05, 0.08) s.
    pub fn baseline(r_load_nominal: f64) -> Self {
        Self {
            intervals: alloc::vec![
                LoadShift { t_start: 0.02, t_end: 0.05, delta_r: 0.5 * r_load_nominal },
                LoadShift { t_start: 0.05, t_end: 0.08, delta_r: -0.5 * r_load_nominal },
            ],
        }
    }

    pub fn intervals(&self) -> &[LoadShift] {
        &self.intervals
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn value_at(&self, t: f64) -> f64 {
        self.intervals.iter().find(|iv| t >= iv.t_start && t < iv.t_end).map_or(0.0, |iv| iv.delta_r)
    }

    /// Checks that `nominal + delta_r` stays positive on every interval.
    pub fn validate_against(&self, r_load_nominal: f64) -> Result<()> {
        if self.intervals.iter().all(|iv| r_load_nominal + iv.delta_r > 0.0) {
            Ok(())
        } else {
            Err(Error::ParameterDomain("disturbance drives the load resistance non-positive"))
        }
    }

    /// Distinct times at which the profile value changes, in ascending order.
    pub fn edges(&self) -> Vec<f64> {
        let mut edges: Vec<f64> = Vec::new();
        for iv in &self.intervals {
            for t in [iv.t_start, iv.t_end] {
                if edges.last() != Some(&t) {
                    edges.push(t);
                }
            }
        }
        edges
    }
}

/// One exact solver step: `x ↦ phi x + gamma`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepMatrices {
    pub phi: Mat3,
    pub gamma: Vec3,
}

impl StepMatrices {
    pub fn from_dynamics(dynamics: &AffineDynamics, dt: f64) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::ParameterDomain("step length must be positive"));
        }
        let mut aug = [[0.0; 4]; 4];
        for i in 0..3 {
            for j in 0..3 {
                aug[i][j] = dynamics.a[i][j] * dt;
            }
            aug[i][3] = dynamics.b[i] * dt;
        }
        let e = expm4(&aug)?;
        let mut phi = [[0.0; 3]; 3];
        let mut gamma = [0.0; 3];
        for i in 0..3 {
            phi[i].copy_from_slice(&e[i][..3]);
            gamma[i] = e[i][3];
        }
        Ok(Self { phi, gamma })
    }

    pub fn apply(&self, x: &Vec3) -> Vec3 {
        let px = mat3_vec(&self.phi, x);
        [px[0] + self.gamma[0], px[1] + self.gamma[1], px[2] + self.gamma[2]]
    }
}

/// Exact solution of `dx/dt = A x + b` after `dt`, starting from `x`.
pub fn exact_step(dynamics: &AffineDynamics, x: &Vec3, dt: f64) -> Result<Vec3> {
    Ok(StepMatrices::from_dynamics(dynamics, dt)?.apply(x))
}

const CACHE_CAPACITY: usize = 256;

/// Memoizing source of [`StepMatrices`] for one circuit.
///
/// Keys are the exact bit patterns of `(mode, r_load, dt)`. The table is owned
/// by one phase; when it fills up it is cleared, which only costs recomputation.
#[derive(Debug, Clone)]
pub struct Discretizer {
    params: CircuitParams,
    cache: BTreeMap<(u8, u64, u64), StepMatrices>,
}

impl Discretizer {
    pub fn new(params: CircuitParams) -> Self {
        Self { params, cache: BTreeMap::new() }
    }

    pub fn params(&self) -> &CircuitParams {
        &self.params
    }

    pub fn step_matrices(&mut self, mode: SwitchMode, r_load: f64, dt: f64) -> Result<StepMatrices> {
        let key = (mode.index() as u8, r_load.to_bits(), dt.to_bits());
        if let Some(m) = self.cache.get(&key) {
            return Ok(*m);
        }
        let dynamics = dynamics_for_mode(&self.params, mode, r_load)?;
        let m = StepMatrices::from_dynamics(&dynamics, dt)?;
        if self.cache.len() >= CACHE_CAPACITY {
            self.cache.clear();
        }
        self.cache.insert(key, m);
        Ok(m)
    }

    /// Step matrices of all three modes at one load, indexed by mode.
    pub fn mode_steps(&mut self, r_load: f64, dt: f64) -> Result<[StepMatrices; 3]> {
        Ok([
            self.step_matrices(SwitchMode::M1, r_load, dt)?,
            self.step_matrices(SwitchMode::M2, r_load, dt)?,
            self.step_matrices(SwitchMode::M3, r_load, dt)?,
        ])
    }

    pub fn cached_entries(&self) -> usize {
        self.cache.len()
    }
}

/// Advance the true plant by `dt` from time `t`, holding the disturbance at
/// its value at `t` and the mode fixed.
pub fn plant_advance(
    disc: &mut Discretizer,
    state: &PhaseState,
    profile: &DisturbanceProfile,
    t: f64,
    dt: f64,
) -> Result<PhaseState> {
    let r_load = disc.params().r_load_nominal + profile.value_at(t);
    let step = disc.step_matrices(state.mode, r_load, dt)?;
    Ok(PhaseState { x: step.apply(&state.x), mode: state.mode })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn nominal_dyn(mode: SwitchMode) -> AffineDynamics {
        dynamics_for_mode(&CircuitParams::baseline(), mode, 100.0).unwrap()
    }

    #[test]
    fn m3_keeps_zero_state() {
        let x = exact_step(&nominal_dyn(SwitchMode::M3), &[0.0; 3], 1e-5).unwrap();
        assert_eq!(x, [0.0; 3]);
    }

    #[test]
    fn m3_keeps_i1_exactly_zero() {
        let mut disc = Discretizer::new(CircuitParams::baseline());
        let profile = DisturbanceProfile::baseline(100.0);
        let mut s = PhaseState::new([0.0, 2.5, -120.0], SwitchMode::M3);
        for k in 0..20_000 {
            s = plant_advance(&mut disc, &s, &profile, k as f64 * 1e-5, 1e-5).unwrap();
            assert_eq!(s.x[0], 0.0);
        }
    }

    #[test]
    fn profile_is_half_open() {
        let p = DisturbanceProfile::baseline(100.0);
        assert_eq!(p.value_at(0.0199999), 0.0);
        assert_eq!(p.value_at(0.02), 50.0);
        assert_eq!(p.value_at(0.03), 50.0);
        assert_eq!(p.value_at(0.05), -50.0);
        assert_eq!(p.value_at(0.06), -50.0);
        assert_eq!(p.value_at(0.08), 0.0);
        assert_eq!(p.edges(), vec![0.02, 0.05, 0.08]);
    }

    #[test]
    fn profile_rejects_overlap_and_bad_loads() {
        let a = LoadShift { t_start: 0.0, t_end: 0.1, delta_r: 1.0 };
        let b = LoadShift { t_start: 0.05, t_end: 0.2, delta_r: 1.0 };
        assert!(DisturbanceProfile::new(vec![a, b]).is_err());
        assert!(DisturbanceProfile::new(vec![b, a]).is_err());
        let neg = LoadShift { t_start: 0.0, t_end: 0.1, delta_r: -100.0 };
        let p = DisturbanceProfile::new(vec![neg]).unwrap();
        assert!(p.validate_against(100.0).is_err());
        assert!(p.validate_against(100.5).is_ok());
    }

    #[test]
    fn plant_uses_shifted_load_inside_intervals() {
        let params = CircuitParams::baseline();
        let profile = DisturbanceProfile::baseline(100.0);
        let s = PhaseState::new([1.0, 2.0, 30.0], SwitchMode::M1);
        for (t, r) in [(0.03, 150.0), (0.06, 50.0), (0.01, 100.0)] {
            let mut disc = Discretizer::new(params);
            let got = plant_advance(&mut disc, &s, &profile, t, 1e-5).unwrap();
            let want = exact_step(&dynamics_for_mode(&params, SwitchMode::M1, r).unwrap(), &s.x, 1e-5).unwrap();
            assert_eq!(got.x, want);
        }
    }

    #[test]
    fn empty_profile_matches_nominal_step() {
        let params = CircuitParams::baseline();
        let mut disc = Discretizer::new(params);
        let s = PhaseState::new([3.0, -1.0, 10.0], SwitchMode::M2);
        let got = plant_advance(&mut disc, &s, &DisturbanceProfile::none(), 0.5, 1e-5).unwrap();
        let want = exact_step(&nominal_dyn(SwitchMode::M2), &s.x, 1e-5).unwrap();
        assert_eq!(got.x, want);
    }

    #[test]
    fn cache_is_bounded() {
        let mut disc = Discretizer::new(CircuitParams::baseline());
        for k in 0..1000 {
            disc.step_matrices(SwitchMode::M1, 100.0 + k as f64, 1e-5).unwrap();
            assert!(disc.cached_entries() <= CACHE_CAPACITY);
        }
    }

    #[test]
    fn integer_ratio_checks() {
        assert_eq!(integer_ratio(100_000.0, 20_000.0), Some(5));
        assert_eq!(integer_ratio(20_000.0, 4_000.0), Some(5));
        assert_eq!(integer_ratio(30_000.0, 20_000.0), None);
        assert_eq!(integer_ratio(10_000.0, 20_000.0), None);
        assert!(SolverConfig::new(100_000.0).unwrap().steps_per(30_000.0).is_err());
    }

    #[test]
    fn non_positive_dt_is_rejected() {
        assert!(exact_step(&nominal_dyn(SwitchMode::M1), &[0.0; 3], 0.0).is_err());
    }
}
