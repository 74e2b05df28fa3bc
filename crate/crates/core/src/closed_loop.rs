//! Closed-loop simulation of one phase: controller, true plant and (for the
//! adaptive case) the disturbance estimator, logged at every solver sample.

use alloc::vec;
use alloc::vec::Vec;

use crate::automaton::{apply_transition, decode_to_switches, ControlSymbol, SwitchStates};
use crate::circuit::{outputs, CircuitParams, PhaseId, PhaseState};
use crate::error::{Error, Result};
use crate::linalg::Vec3;
use crate::metrics::MetricsConfig;
use crate::odcm::{select_control, HorizonConfig, ReferenceSpec};
use crate::opcm::{expand_duty_to_beats, per_period_disturbance, select_duty, DutyTriple, PwmConfig};
use crate::plant::{integer_ratio, plant_advance, Discretizer, DisturbanceProfile};
use crate::rls::{sample_disturbance, DisturbanceSample, RlsConfig, RlsState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ControlMode {
    Odcm,
    Opcm,
}

impl ControlMode {
    pub fn label(self) -> &'static str {
        match self {
            ControlMode::Odcm => "odcm",
            ControlMode::Opcm => "opcm",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Case {
    /// No load shift.
    NoDisturbance = 1,
    /// Load shift, controller assumes the nominal load.
    Disturbed = 2,
    /// Load shift with the RLS forecast fed to the controller.
    Adaptive = 3,
}

impl Case {
    pub const ALL: [Case; 3] = [Case::NoDisturbance, Case::Disturbed, Case::Adaptive];

    pub fn number(self) -> u8 {
        self as u8
    }

    pub fn from_number(n: u8) -> Option<Self> {
        match n {
            1 => Some(Case::NoDisturbance),
            2 => Some(Case::Disturbed),
            3 => Some(Case::Adaptive),
            _ => None,
        }
    }
}

/// Effective loads predicted with the forecast are floored at this fraction
/// of the nominal load.
pub const MIN_LOAD_FRACTION: f64 = 0.01;

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub mode: ControlMode,
    pub case: Case,
    /// Simulated time (s).
    pub duration: f64,
    pub circuit: CircuitParams,
    pub reference: ReferenceSpec,
    pub horizon: HorizonConfig,
    pub pwm: PwmConfig,
    pub rls: RlsConfig,
    /// Load-shift profile used by cases 2 and 3; case 1 ignores it.
    pub disturbance: DisturbanceProfile,
    pub metrics: MetricsConfig,
}

impl ScenarioConfig {
    pub fn baseline(mode: ControlMode, case: Case) -> Self {
        let circuit = CircuitParams::baseline();
        Self {
            mode,
            case,
            duration: 0.1,
            circuit,
            reference: ReferenceSpec::baseline(),
            horizon: HorizonConfig::baseline(),
            pwm: PwmConfig::baseline(),
            rls: RlsConfig::baseline(),
            disturbance: DisturbanceProfile::baseline(circuit.r_load_nominal),
            metrics: MetricsConfig::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.duration.is_finite() && self.duration > 0.0) {
            return Err(Error::InvalidConfig("duration must be positive"));
        }
        self.circuit.validate()?;
        self.reference.validate()?;
        self.rls.validate()?;
        self.metrics.validate()?;
        if self.case != Case::NoDisturbance && self.disturbance.is_empty() {
            return Err(Error::InvalidConfig("cases 2 and 3 need a non-empty disturbance profile"));
        }
        self.disturbance.validate_against(self.circuit.r_load_nominal)?;
        let beats_per_period = integer_ratio(self.horizon.f_c, self.pwm.f_pwm)
            .ok_or(Error::InvalidConfig("controller frequency must be an integer multiple of the PWM frequency"))?;
        if beats_per_period != self.pwm.beats_per_period() {
            return Err(Error::InvalidConfig("PWM configuration was built for a different controller frequency"));
        }
        if self.case == Case::Adaptive {
            if integer_ratio(self.rls.f_e, self.horizon.f_c) != Some(1) {
                return Err(Error::InvalidConfig("estimator must sample once per control beat"));
            }
            if self.mode == ControlMode::Odcm && self.rls.n_e < self.horizon.n_steps {
                return Err(Error::InvalidConfig("forecast length must cover the ODCM horizon"));
            }
        }
        Ok(())
    }

    /// Disturbance the plant actually sees.
    pub fn true_disturbance(&self) -> DisturbanceProfile {
        match self.case {
            Case::NoDisturbance => DisturbanceProfile::none(),
            Case::Disturbed | Case::Adaptive => self.disturbance.clone(),
        }
    }

    pub fn estimator_active(&self) -> bool {
        self.case == Case::Adaptive
    }

    pub fn beats(&self) -> usize {
        match self.mode {
            ControlMode::Odcm => libm::round(self.duration * self.horizon.f_c) as usize,
            ControlMode::Opcm => libm::round(self.duration * self.pwm.f_pwm) as usize * self.pwm.beats_per_period(),
        }
    }
}

/// One solver sample of one phase.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LogRow {
    pub t: f64,
    pub phase: PhaseId,
    /// Symbol driving the plant over the step that ended at `t`.
    pub sigma: ControlSymbol,
    pub switches: SwitchStates,
    /// Duty triple of the PWM period containing the step (OPCM only).
    pub duty: Option<DutyTriple>,
    pub x: Vec3,
    pub v_o: f64,
    pub v_ref: f64,
    /// `v_o - v_ref`.
    pub error: f64,
    pub r_load_true: f64,
    /// Latest disturbance sample (held between estimator updates).
    pub w_sample: f64,
    /// First forecast element the controller used for the current beat.
    pub w_hat_first: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PhaseRun {
    pub phase: PhaseId,
    pub rows: Vec<LogRow>,
    /// Number of optimizer calls.
    pub decisions: usize,
    pub held_samples: usize,
    pub degenerate_samples: usize,
    /// Forecast values raised to the minimum effective load.
    pub clamped_forecasts: usize,
}

struct Loop<'a> {
    cfg: &'a ScenarioConfig,
    phase: PhaseId,
    profile: DisturbanceProfile,
    disc: Discretizer,
    state: PhaseState,
    rls: Option<RlsState>,
    w_sample: f64,
    run: PhaseRun,
}

impl<'a> Loop<'a> {
    fn new(cfg: &'a ScenarioConfig, phase: PhaseId) -> Result<Self> {
        let rls = if cfg.estimator_active() { Some(RlsState::new(cfg.rls)?) } else { None };
        let mut this = Self {
            cfg,
            phase,
            profile: cfg.true_disturbance(),
            disc: Discretizer::new(cfg.circuit),
            state: PhaseState::initial(),
            rls,
            w_sample: 0.0,
            run: PhaseRun { phase, ..PhaseRun::default() },
        };
        let initial = this.row(0.0, ControlSymbol::for_mode(this.state.mode), None, 0.0);
        this.run.rows.push(initial);
        Ok(this)
    }

    fn params(&self) -> &CircuitParams {
        &self.cfg.circuit
    }

    fn r_load_true(&self, t: f64) -> f64 {
        self.params().r_load_nominal + self.profile.value_at(t)
    }

    fn row(&self, t: f64, sigma: ControlSymbol, duty: Option<DutyTriple>, w_hat_first: f64) -> LogRow {
        let r_load_true = self.r_load_true(t);
        let v_o = outputs(self.params(), &self.state, r_load_true).v_o;
        let v_ref = self.cfg.reference.value(self.phase, t);
        LogRow {
            t,
            phase: self.phase,
            sigma,
            switches: decode_to_switches(sigma),
            duty,
            x: self.state.x,
            v_o,
            v_ref,
            error: v_o - v_ref,
            r_load_true,
            w_sample: self.w_sample,
            w_hat_first,
        }
    }

    /// Forecast for the next `n` beats, floored so the predicted load stays
    /// positive; zeros when the estimator is off.
    fn forecast(&mut self, n: usize) -> Vec<f64> {
        let Some(rls) = &self.rls else {
            return vec![0.0; n];
        };
        let nominal = self.cfg.circuit.r_load_nominal;
        let floor = (MIN_LOAD_FRACTION - 1.0) * nominal;
        let mut out = rls.forecast_for_controller(n);
        for w in out.iter_mut() {
            if *w < floor {
                *w = floor;
                self.run.clamped_forecasts += 1;
            }
        }
        out
    }

    /// Execute one control beat on the true plant and feed the estimator.
    fn execute_beat(
        &mut self,
        beat: usize,
        sym: ControlSymbol,
        duty: Option<DutyTriple>,
        w_hat_first: f64,
    ) -> Result<()> {
        let spb = self.cfg.horizon.samples_per_beat();
        let f_sol = self.cfg.horizon.solver.f_sol;
        let dt = self.cfg.horizon.dt_sol();

        // Nominal-model prediction of the state at the end of the beat.
        let predicted = if self.rls.is_some() {
            let nominal = self.cfg.circuit.r_load_nominal;
            let mut s = apply_transition(self.state, sym);
            let step = self.disc.step_matrices(s.mode, nominal, dt)?;
            for _ in 0..spb {
                s.x = step.apply(&s.x);
            }
            Some(s)
        } else {
            None
        };

        self.state = apply_transition(self.state, sym);
        for i in 0..spb {
            let j = beat * spb + i;
            let t = j as f64 / f_sol;
            self.state = plant_advance(&mut self.disc, &self.state, &self.profile, t, dt)?;
            if i + 1 == spb {
                if let Some(predicted) = predicted {
                    self.sample_and_update((j + 1) as f64 / f_sol, &predicted)?;
                }
            }
            let row = self.row((j + 1) as f64 / f_sol, sym, duty, w_hat_first);
            self.run.rows.push(row);
        }
        Ok(())
    }

    fn sample_and_update(&mut self, t: f64, predicted: &PhaseState) -> Result<()> {
        let nominal = self.cfg.circuit.r_load_nominal;
        let measured = outputs(self.params(), &self.state, self.r_load_true(t));
        let expected = outputs(self.params(), predicted, nominal);
        let rls = self.rls.as_mut().expect("estimator active");
        let sample = sample_disturbance(&measured, &expected, rls.last_effective_sample, rls.config().epsilon);
        match sample {
            DisturbanceSample::Fresh(v) => rls.last_effective_sample = v,
            DisturbanceSample::Held(_) => self.run.held_samples += 1,
            DisturbanceSample::Degenerate(_) => self.run.degenerate_samples += 1,
        }
        self.w_sample = sample.value();
        rls.update(self.w_sample)?;
        Ok(())
    }

    fn run_odcm(&mut self) -> Result<()> {
        let horizon = self.cfg.horizon;
        for k in 0..self.cfg.beats() {
            let t_k = k as f64 / horizon.f_c;
            let w_hat = self.forecast(horizon.n_steps);
            let sym =
                select_control(&mut self.disc, &self.state, &self.cfg.reference, self.phase, t_k, &w_hat, &horizon)?;
            self.run.decisions += 1;
            self.execute_beat(k, sym, None, w_hat[0])?;
        }
        Ok(())
    }

    fn run_opcm(&mut self) -> Result<()> {
        let horizon = self.cfg.horizon;
        let pwm = self.cfg.pwm;
        let b = pwm.beats_per_period();
        for p in 0..self.cfg.beats() / b {
            let t_p = p as f64 / pwm.f_pwm;
            let w_hat = match &self.rls {
                Some(rls) => {
                    let n = rls.config().n_e;
                    per_period_disturbance(&self.forecast(n), &pwm)
                }
                None => vec![0.0; pwm.n_periods],
            };
            let duty =
                select_duty(&mut self.disc, &self.state, &self.cfg.reference, self.phase, t_p, &w_hat, &horizon, &pwm)?;
            self.run.decisions += 1;
            for (i, sym) in expand_duty_to_beats(&duty).into_iter().enumerate() {
                self.execute_beat(p * b + i, sym, Some(duty), w_hat[0])?;
            }
        }
        Ok(())
    }
}

/// Simulate one phase of the scenario from the de-energized initial state.
pub fn run_phase(cfg: &ScenarioConfig, phase: PhaseId) -> Result<PhaseRun> {
    cfg.validate()?;
    let mut lp = Loop::new(cfg, phase)?;
    match cfg.mode {
        ControlMode::Odcm => lp.run_odcm()?,
        ControlMode::Opcm => lp.run_opcm()?,
    }
    Ok(lp.run)
}
