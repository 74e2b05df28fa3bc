//! Optimal discrete control mode: at every control beat, exhaustively search
//! all `3^N` mode sequences over an `N`-beat horizon and execute the first
//! symbol of the best one.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::automaton::{apply_transition, ControlSymbol};
use crate::circuit::{outputs, CircuitParams, PhaseId, PhaseState};
use crate::error::{Error, Result};
use crate::plant::{Discretizer, SolverConfig, StepMatrices};

/// Balanced three-phase sinusoidal voltage reference.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceSpec {
    /// Peak voltage.
    pub amplitude: f64,
    pub frequency: f64,
    /// Initial phase angle of A, B and C in radians.
    pub phase_angles: [f64; 3],
}

impl ReferenceSpec {
    /// Balanced set: B and C sit at `phase_a` + 120° and + 240°.
    pub fn balanced(amplitude: f64, frequency: f64, phase_a: f64) -> Self {
        let step = 2.0 * PI / 3.0;
        Self { amplitude, frequency, phase_angles: [phase_a, phase_a + step, phase_a + 2.0 * step] }
    }

    /// 380 V peak, 50 Hz, phase A at 30°.
    pub fn baseline() -> Self {
        Self::balanced(380.0, 50.0, PI / 6.0)
    }

    pub fn value(&self, phase: PhaseId, t: f64) -> f64 {
        self.amplitude * libm::sin(2.0 * PI * self.frequency * t + self.phase_angles[phase.index()])
    }

    pub fn validate(&self) -> Result<()> {
        let finite =
            self.amplitude.is_finite() && self.frequency.is_finite() && self.phase_angles.iter().all(|a| a.is_finite());
        if finite && self.amplitude >= 0.0 && self.frequency >= 0.0 {
            Ok(())
        } else {
            Err(Error::InvalidConfig("reference amplitude and frequency must be finite and non-negative"))
        }
    }
}

impl Default for ReferenceSpec {
    fn default() -> Self {
        Self::baseline()
    }
}

/// Horizon length and the controller/solver clocks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HorizonConfig {
    pub n_steps: usize,
    pub f_c: f64,
    pub solver: SolverConfig,
    samples_per_beat: usize,
}

impl HorizonConfig {
    pub fn new(n_steps: usize, f_c: f64, f_sol: f64) -> Result<Self> {
        if n_steps == 0 {
            return Err(Error::InvalidConfig("horizon must have at least one step"));
        }
        let solver = SolverConfig::new(f_sol)?;
        let samples_per_beat = solver.steps_per(f_c)?;
        Ok(Self { n_steps, f_c, solver, samples_per_beat })
    }

    /// N = 5 at 20 kHz with a 100 kHz solver.
    pub fn baseline() -> Self {
        Self { n_steps: 5, f_c: 20_000.0, solver: SolverConfig { f_sol: 100_000.0 }, samples_per_beat: 5 }
    }

    pub fn with_steps(&self, n_steps: usize) -> Result<Self> {
        Self::new(n_steps, self.f_c, self.solver.f_sol)
    }

    pub fn dt_c(&self) -> f64 {
        1.0 / self.f_c
    }

    pub fn dt_sol(&self) -> f64 {
        self.solver.dt()
    }

    /// Solver samples per control beat (`f_sol / f_c`).
    pub fn samples_per_beat(&self) -> usize {
        self.samples_per_beat
    }

    /// Length of the cost window, `N * f_sol / f_c`.
    pub fn cost_samples(&self) -> usize {
        self.n_steps * self.samples_per_beat
    }
}

impl Default for HorizonConfig {
    fn default() -> Self {
        Self::baseline()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ControlSequence(pub Vec<ControlSymbol>);

impl ControlSequence {
    pub fn symbols(&self) -> &[ControlSymbol] {
        &self.0
    }

    pub fn first(&self) -> Option<ControlSymbol> {
        self.0.first().copied()
    }
}

/// Reference samples at `t_k + dt_sol, ..., t_k + N * (f_sol / f_c) * dt_sol`.
pub fn reference_window(spec: &ReferenceSpec, phase: PhaseId, t_k: f64, cfg: &HorizonConfig) -> Vec<f64> {
    let dt = cfg.dt_sol();
    (1..=cfg.cost_samples()).map(|i| spec.value(phase, t_k + i as f64 * dt)).collect()
}

/// Per-horizon-step loads and step matrices for all three modes.
struct HorizonModel {
    loads: Vec<f64>,
    steps: Vec<[StepMatrices; 3]>,
}

impl HorizonModel {
    fn build(disc: &mut Discretizer, w_hat: &[f64], dt: f64) -> Result<Self> {
        let nominal = disc.params().r_load_nominal;
        let mut loads = Vec::with_capacity(w_hat.len());
        let mut steps = Vec::with_capacity(w_hat.len());
        for w in w_hat {
            let r = nominal + w;
            loads.push(r);
            steps.push(disc.mode_steps(r, dt)?);
        }
        Ok(Self { loads, steps })
    }
}

/// Advance one beat under `sym` from `state`, feeding each sample's `v_o` to `emit`.
pub(crate) fn run_beat(
    params: &CircuitParams,
    steps: &[StepMatrices; 3],
    r_load: f64,
    state: PhaseState,
    sym: ControlSymbol,
    samples: usize,
    mut emit: impl FnMut(f64),
) -> PhaseState {
    let mut s = apply_transition(state, sym);
    let step = &steps[s.mode.index()];
    for _ in 0..samples {
        s.x = step.apply(&s.x);
        emit(outputs(params, &s, r_load).v_o);
    }
    s
}

/// Predicted `v_o` at every solver sample of the horizon when `seq` is applied.
pub fn predict_trajectory(
    disc: &mut Discretizer,
    x0: &PhaseState,
    seq: &[ControlSymbol],
    w_hat: &[f64],
    cfg: &HorizonConfig,
) -> Result<Vec<f64>> {
    if w_hat.len() != seq.len() {
        return Err(Error::InvalidConfig("disturbance forecast length must match the sequence length"));
    }
    let model = HorizonModel::build(disc, w_hat, cfg.dt_sol())?;
    let params = *disc.params();
    let mut out = Vec::with_capacity(seq.len() * cfg.samples_per_beat());
    let mut state = *x0;
    for (n, sym) in seq.iter().enumerate() {
        state =
            run_beat(&params, &model.steps[n], model.loads[n], state, *sym, cfg.samples_per_beat(), |v| out.push(v));
    }
    Ok(out)
}

/// Winner of one exhaustive search.
#[derive(Debug, Clone, PartialEq)]
pub struct OdcmSolution {
    pub first: ControlSymbol,
    pub sequence: ControlSequence,
    pub cost: f64,
    /// Number of complete sequences whose cost was evaluated.
    pub evaluated: usize,
}

struct Search<'a> {
    params: CircuitParams,
    model: &'a HorizonModel,
    reference: &'a [f64],
    samples: usize,
    path: Vec<ControlSymbol>,
    best_path: Vec<ControlSymbol>,
    best_cost: f64,
    evaluated: usize,
}

impl Search<'_> {
    // Depth-first in symbol order visits leaves in odometer order (last
    // symbol fastest), and shares each prefix's propagation among its children.
    fn visit(&mut self, depth: usize, state: PhaseState, cost: f64) {
        if depth == self.model.steps.len() {
            self.evaluated += 1;
            if cost < self.best_cost {
                self.best_cost = cost;
                self.best_path.clone_from(&self.path);
            }
            return;
        }
        let reference = &self.reference[depth * self.samples..(depth + 1) * self.samples];
        for sym in ControlSymbol::ALL {
            let mut c = cost;
            let mut i = 0;
            let next = run_beat(
                &self.params,
                &self.model.steps[depth],
                self.model.loads[depth],
                state,
                sym,
                self.samples,
                |v| {
                    let e = v - reference[i];
                    c += e * e;
                    i += 1;
                },
            );
            self.path.push(sym);
            self.visit(depth + 1, next, c);
            self.path.pop();
        }
    }
}

/// Exhaustive search against an explicit reference window.
///
/// Ties keep the earliest sequence in enumeration order.
pub fn solve_odcm(
    disc: &mut Discretizer,
    x0: &PhaseState,
    reference: &[f64],
    w_hat: &[f64],
    cfg: &HorizonConfig,
) -> Result<OdcmSolution> {
    if w_hat.len() != cfg.n_steps {
        return Err(Error::InvalidConfig("disturbance forecast length must equal the horizon"));
    }
    if reference.len() != cfg.cost_samples() {
        return Err(Error::InvalidConfig("reference window length must equal the cost window"));
    }
    let model = HorizonModel::build(disc, w_hat, cfg.dt_sol())?;
    let mut search = Search {
        params: *disc.params(),
        model: &model,
        reference,
        samples: cfg.samples_per_beat(),
        path: Vec::with_capacity(cfg.n_steps),
        best_path: Vec::new(),
        best_cost: f64::INFINITY,
        evaluated: 0,
    };
    search.visit(0, *x0, 0.0);
    if search.best_path.is_empty() {
        return Err(Error::Numeric("no finite-cost control sequence"));
    }
    Ok(OdcmSolution {
        first: search.best_path[0],
        sequence: ControlSequence(search.best_path),
        cost: search.best_cost,
        evaluated: search.evaluated,
    })
}

/// Receding-horizon decision for one phase at control timing `t_k`.
pub fn select_control(
    disc: &mut Discretizer,
    x0: &PhaseState,
    spec: &ReferenceSpec,
    phase: PhaseId,
    t_k: f64,
    w_hat: &[f64],
    cfg: &HorizonConfig,
) -> Result<ControlSymbol> {
    let reference = reference_window(spec, phase, t_k, cfg);
    Ok(solve_odcm(disc, x0, &reference, w_hat, cfg)?.first)
}
