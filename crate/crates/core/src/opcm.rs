//! Optimal PWM control mode.
//!
//! Each PWM period is split into `B = f_c / f_pwm` control beats and runs
//! `m1 -> m2 -> m3` in that fixed order, with `n_d1` beats in m1, `n_d2` in
//! m2 and the rest in m3. The optimizer searches over all such integer
//! splits for `n_periods` consecutive periods.

use alloc::vec::Vec;

use crate::automaton::{apply_transition, ControlSymbol};
use crate::circuit::{outputs, CircuitParams, PhaseId, PhaseState};
use crate::error::{Error, Result};
use crate::odcm::{reference_window, HorizonConfig, ReferenceSpec};
use crate::plant::{integer_ratio, Discretizer, StepMatrices};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PwmConfig {
    pub f_pwm: f64,
    pub n_periods: usize,
    beats_per_period: usize,
}

impl PwmConfig {
    pub fn new(f_pwm: f64, n_periods: usize, f_c: f64) -> Result<Self> {
        if n_periods == 0 {
            return Err(Error::InvalidConfig("PWM horizon must cover at least one period"));
        }
        let beats_per_period = integer_ratio(f_c, f_pwm)
            .ok_or(Error::InvalidConfig("controller frequency must be an integer multiple of the PWM frequency"))?;
        Ok(Self { f_pwm, n_periods, beats_per_period })
    }

    /// 4 kHz PWM against the 20 kHz controller, one-period horizon.
    pub fn baseline() -> Self {
        Self { f_pwm: 4_000.0, n_periods: 1, beats_per_period: 5 }
    }

    pub fn t_pwm(&self) -> f64 {
        1.0 / self.f_pwm
    }

    pub fn beats_per_period(&self) -> usize {
        self.beats_per_period
    }
}

impl Default for PwmConfig {
    fn default() -> Self {
        Self::baseline()
    }
}

/// Quantized duty ratios of one PWM period.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DutyTriple {
    n_d1: usize,
    n_d2: usize,
    beats: usize,
}

impl DutyTriple {
    pub fn new(n_d1: usize, n_d2: usize, beats: usize) -> Result<Self> {
        if beats == 0 || n_d1 > beats || n_d2 > beats - n_d1 {
            return Err(Error::InvalidConfig("duty beat counts outside the simplex"));
        }
        Ok(Self { n_d1, n_d2, beats })
    }

    pub fn n_d1(&self) -> usize {
        self.n_d1
    }

    pub fn n_d2(&self) -> usize {
        self.n_d2
    }

    pub fn n_d3(&self) -> usize {
        self.beats - self.n_d1 - self.n_d2
    }

    pub fn beats(&self) -> usize {
        self.beats
    }

    pub fn d1(&self) -> f64 {
        self.n_d1 as f64 / self.beats as f64
    }

    pub fn d2(&self) -> f64 {
        self.n_d2 as f64 / self.beats as f64
    }

    /// `1 - d1 - d2`, computed from the integer remainder so it never dips below zero.
    pub fn d3(&self) -> f64 {
        self.n_d3() as f64 / self.beats as f64
    }

    fn segments(&self) -> [(ControlSymbol, usize); 3] {
        [(ControlSymbol::One, self.n_d1), (ControlSymbol::Two, self.n_d2), (ControlSymbol::Three, self.n_d3())]
    }
}

/// All `(n_d1, n_d2)` splits, `n_d1` ascending then `n_d2` ascending.
pub fn enumerate_duty_candidates(cfg: &PwmConfig) -> Vec<DutyTriple> {
    let b = cfg.beats_per_period();
    (0..=b).flat_map(|n1| (0..=b - n1).map(move |n2| DutyTriple { n_d1: n1, n_d2: n2, beats: b })).collect()
}

/// Per-beat control symbols that realize `duty`.
pub fn expand_duty_to_beats(duty: &DutyTriple) -> Vec<ControlSymbol> {
    duty.segments().into_iter().flat_map(|(sym, n)| core::iter::repeat_n(sym, n)).collect()
}

/// Propagate one PWM period through its three sub-intervals. Transitions
/// happen only at sub-interval boundaries; empty sub-intervals are skipped.
fn run_period(
    params: &CircuitParams,
    steps: &[StepMatrices; 3],
    r_load: f64,
    state: PhaseState,
    duty: &DutyTriple,
    samples_per_beat: usize,
    mut emit: impl FnMut(f64),
) -> PhaseState {
    let mut s = state;
    for (sym, beats) in duty.segments() {
        if beats == 0 {
            continue;
        }
        s = apply_transition(s, sym);
        let step = &steps[s.mode.index()];
        for _ in 0..beats * samples_per_beat {
            s.x = step.apply(&s.x);
            emit(outputs(params, &s, r_load).v_o);
        }
    }
    s
}

/// Predicted `v_o` at every solver sample of one PWM period under `duty`,
/// with the load shifted by `w_hat` over the whole period.
pub fn predict_pwm_period(
    disc: &mut Discretizer,
    x0: &PhaseState,
    duty: &DutyTriple,
    w_hat: f64,
    horizon: &HorizonConfig,
) -> Result<Vec<f64>> {
    let r_load = disc.params().r_load_nominal + w_hat;
    let steps = disc.mode_steps(r_load, horizon.dt_sol())?;
    let params = *disc.params();
    let mut out = Vec::with_capacity(duty.beats() * horizon.samples_per_beat());
    run_period(&params, &steps, r_load, *x0, duty, horizon.samples_per_beat(), |v| out.push(v));
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct OpcmSolution {
    pub first: DutyTriple,
    pub duties: Vec<DutyTriple>,
    pub cost: f64,
    pub evaluated: usize,
}

struct Search<'a> {
    params: CircuitParams,
    steps: &'a [[StepMatrices; 3]],
    loads: &'a [f64],
    candidates: &'a [DutyTriple],
    reference: &'a [f64],
    samples_per_beat: usize,
    samples_per_period: usize,
    path: Vec<DutyTriple>,
    best_path: Vec<DutyTriple>,
    best_cost: f64,
    evaluated: usize,
}

impl Search<'_> {
    fn visit(&mut self, depth: usize, state: PhaseState, cost: f64) {
        if depth == self.steps.len() {
            self.evaluated += 1;
            if cost < self.best_cost {
                self.best_cost = cost;
                self.best_path.clone_from(&self.path);
            }
            return;
        }
        let reference = &self.reference[depth * self.samples_per_period..(depth + 1) * self.samples_per_period];
        for duty in self.candidates {
            let mut c = cost;
            let mut i = 0;
            let next = run_period(
                &self.params,
                &self.steps[depth],
                self.loads[depth],
                state,
                duty,
                self.samples_per_beat,
                |v| {
                    let e = v - reference[i];
                    c += e * e;
                    i += 1;
                },
            );
            self.path.push(*duty);
            self.visit(depth + 1, next, c);
            self.path.pop();
        }
    }
}

/// Exhaustive search over duty sequences against an explicit reference.
///
/// `w_hat` holds one load-shift estimate per horizon period. Ties keep the
/// first sequence in enumeration order.
pub fn solve_opcm(
    disc: &mut Discretizer,
    x0: &PhaseState,
    reference: &[f64],
    w_hat: &[f64],
    horizon: &HorizonConfig,
    pwm: &PwmConfig,
) -> Result<OpcmSolution> {
    let samples_per_period = pwm.beats_per_period() * horizon.samples_per_beat();
    if w_hat.len() != pwm.n_periods {
        return Err(Error::InvalidConfig("one disturbance estimate per PWM period is required"));
    }
    if reference.len() != pwm.n_periods * samples_per_period {
        return Err(Error::InvalidConfig("reference window must span the PWM horizon"));
    }
    let nominal = disc.params().r_load_nominal;
    let loads: Vec<f64> = w_hat.iter().map(|w| nominal + w).collect();
    let steps = loads.iter().map(|r| disc.mode_steps(*r, horizon.dt_sol())).collect::<Result<Vec<_>>>()?;
    let candidates = enumerate_duty_candidates(pwm);
    let mut search = Search {
        params: *disc.params(),
        steps: &steps,
        loads: &loads,
        candidates: &candidates,
        reference,
        samples_per_beat: horizon.samples_per_beat(),
        samples_per_period,
        path: Vec::with_capacity(pwm.n_periods),
        best_path: Vec::new(),
        best_cost: f64::INFINITY,
        evaluated: 0,
    };
    search.visit(0, *x0, 0.0);
    if search.best_path.is_empty() {
        return Err(Error::Numeric("no finite-cost duty sequence"));
    }
    Ok(OpcmSolution {
        first: search.best_path[0],
        duties: search.best_path,
        cost: search.best_cost,
        evaluated: search.evaluated,
    })
}

/// Duty decision for the PWM period starting at `t_k`.
#[allow(clippy::too_many_arguments)]
pub fn select_duty(
    disc: &mut Discretizer,
    x0: &PhaseState,
    spec: &ReferenceSpec,
    phase: PhaseId,
    t_k: f64,
    w_hat: &[f64],
    horizon: &HorizonConfig,
    pwm: &PwmConfig,
) -> Result<DutyTriple> {
    let window = horizon.with_steps(pwm.n_periods * pwm.beats_per_period())?;
    let reference = reference_window(spec, phase, t_k, &window);
    Ok(solve_opcm(disc, x0, &reference, w_hat, horizon, pwm)?.first)
}

/// Collapse a beat-level forecast into one value per PWM period by averaging
/// each period's beats. Periods past the end of the forecast reuse the last
/// available period value; an empty forecast gives zeros.
pub fn per_period_disturbance(forecast: &[f64], pwm: &PwmConfig) -> Vec<f64> {
    let b = pwm.beats_per_period();
    let mut out: Vec<f64> = Vec::with_capacity(pwm.n_periods);
    for p in 0..pwm.n_periods {
        let start = p * b;
        let value = if start < forecast.len() {
            let chunk = &forecast[start..forecast.len().min(start + b)];
            chunk.iter().sum::<f64>() / chunk.len() as f64
        } else {
            out.last().copied().unwrap_or(0.0)
        };
        out.push(value);
    }
    out
}
