//! Electrical model of one decoupled inverter phase with its LCL filter,
//! transmission line and resistive load.
//!
//! State vector: `x = (i1, i2, v1)`, the inverter-side inductor current, the
//! grid-side inductor current and the filter capacitor voltage. Each switch
//! mode has affine dynamics `dx/dt = A x + b`; the three modes share rows 2
//! and 3 of `A` and differ only in the inverter-side row.

use crate::error::{Error, Result};
use crate::linalg::{Mat3, Vec3};

/// Electrical constants of one phase, in SI units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CircuitParams {
    pub r_line: f64,
    pub l_line: f64,
    pub l1: f64,
    pub l2: f64,
    pub c: f64,
    pub r_load_nominal: f64,
    pub u_dc: f64,
}

impl CircuitParams {
    /// 0.5 Ω / 1.5 mH line, 9 mH / 3 mH / 60 µF filter, 100 Ω load, 800 V DC.
    pub const fn baseline() -> Self {
        Self { r_line: 0.5, l_line: 0.0015, l1: 0.009, l2: 0.003, c: 60e-6, r_load_nominal: 100.0, u_dc: 800.0 }
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [self.r_line, self.l_line, self.l1, self.l2, self.c, self.r_load_nominal, self.u_dc];
        if fields.iter().all(|v| v.is_finite() && *v > 0.0) {
            Ok(())
        } else {
            Err(Error::ParameterDomain("circuit parameters must be finite and strictly positive"))
        }
    }

    /// Series inductance seen by the grid-side current.
    pub fn l_out(&self) -> f64 {
        self.l2 + self.l_line
    }
}

impl Default for CircuitParams {
    fn default() -> Self {
        Self::baseline()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub enum PhaseId {
    #[default]
    A,
    B,
    C,
}

impl PhaseId {
    pub const ALL: [PhaseId; 3] = [PhaseId::A, PhaseId::B, PhaseId::C];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn label(self) -> &'static str {
        match self {
            PhaseId::A => "A",
            PhaseId::B => "B",
            PhaseId::C => "C",
        }
    }
}

/// Switch configuration of one leg. The (on, on) shoot-through state has no
/// variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub enum SwitchMode {
    /// Upper switch on, lower off.
    M1,
    /// Upper off, lower on.
    M2,
    /// Both off.
    #[default]
    M3,
}

impl SwitchMode {
    pub const ALL: [SwitchMode; 3] = [SwitchMode::M1, SwitchMode::M2, SwitchMode::M3];

    pub fn index(self) -> usize {
        self as usize
    }
}

/// Continuous state of one phase together with its active mode.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PhaseState {
    pub x: Vec3,
    pub mode: SwitchMode,
}

impl PhaseState {
    pub fn new(x: Vec3, mode: SwitchMode) -> Self {
        Self { x, mode }
    }

    /// De-energized start: zero state in the all-off mode.
    pub fn initial() -> Self {
        Self { x: [0.0; 3], mode: SwitchMode::M3 }
    }

    pub fn i1(&self) -> f64 {
        self.x[0]
    }

    pub fn i2(&self) -> f64 {
        self.x[1]
    }

    pub fn v1(&self) -> f64 {
        self.x[2]
    }
}

/// `dx/dt = a x + b` for one mode at one load value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineDynamics {
    pub a: Mat3,
    pub b: Vec3,
}

impl AffineDynamics {
    pub fn derivative(&self, x: &Vec3) -> Vec3 {
        let ax = crate::linalg::mat3_vec(&self.a, x);
        [ax[0] + self.b[0], ax[1] + self.b[1], ax[2] + self.b[2]]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct OutputSignals {
    pub v_o: f64,
    pub v_load: f64,
    pub i_o: f64,
}

fn check_load(params: &CircuitParams, r_load: f64) -> Result<()> {
    if !(r_load.is_finite() && r_load > 0.0) {
        return Err(Error::ParameterDomain("effective load resistance must be positive"));
    }
    if !(params.l_out() > 0.0 && params.l1 > 0.0 && params.c > 0.0) {
        return Err(Error::ParameterDomain("zero inductance or capacitance in denominator"));
    }
    Ok(())
}

/// Affine dynamics of `mode` with the load resistance replaced by
/// `r_load_effective`.
pub fn dynamics_for_mode(params: &CircuitParams, mode: SwitchMode, r_load_effective: f64) -> Result<AffineDynamics> {
    check_load(params, r_load_effective)?;
    let l_out = params.l_out();
    let q_row2 = [0.0, -(params.r_line + r_load_effective) / l_out, 1.0 / l_out];
    let q_row3 = [1.0 / params.c, -1.0 / params.c, 0.0];
    let drive = params.u_dc / params.l1;
    let (row1, b1) = match mode {
        SwitchMode::M1 => ([0.0, 0.0, -1.0 / params.l1], drive),
        SwitchMode::M2 => ([0.0, 0.0, -1.0 / params.l1], -drive),
        SwitchMode::M3 => ([0.0; 3], 0.0),
    };
    Ok(AffineDynamics { a: [row1, q_row2, q_row3], b: [b1, 0.0, 0.0] })
}

/// Output voltage, load voltage and output current of a phase state.
///
/// The load voltage is evaluated through the line drop; it equals
/// `r_load_effective * i2` up to rounding.
pub fn outputs(params: &CircuitParams, state: &PhaseState, r_load_effective: f64) -> OutputSignals {
    let [_, i2, v1] = state.x;
    let di2 = (-(params.r_line + r_load_effective) * i2 + v1) / params.l_out();
    OutputSignals { v_o: v1 - params.l2 * di2, v_load: v1 - params.l_out() * di2 - params.r_line * i2, i_o: i2 }
}
