//! Scenario configuration file.
//!
//! TOML with one table per subsystem; dotted keys (`circuit.r_line = 0.5`)
//! and `[circuit]` sections are interchangeable. Every key is optional and
//! defaults to the reference parameter set.

use std::path::Path;

use invmpc_core::{
    Case, CircuitParams, ControlMode, DisturbanceProfile, HorizonConfig, LoadShift, MetricsConfig, PwmConfig,
    ReferenceSpec, RlsConfig, ScenarioConfig,
};
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CircuitSection {
    pub r_line: f64,
    pub l_line: f64,
    pub l1: f64,
    pub l2: f64,
    pub c: f64,
    pub r_load: f64,
    pub u_dc: f64,
}

impl Default for CircuitSection {
    fn default() -> Self {
        let p = CircuitParams::baseline();
        Self { r_line: p.r_line, l_line: p.l_line, l1: p.l1, l2: p.l2, c: p.c, r_load: p.r_load_nominal, u_dc: p.u_dc }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReferenceSection {
    /// Peak voltage.
    pub amplitude: f64,
    pub frequency: f64,
    /// Phase A initial angle in degrees; B and C follow at +120° steps.
    pub phase_a_deg: f64,
}

impl Default for ReferenceSection {
    fn default() -> Self {
        Self { amplitude: 380.0, frequency: 50.0, phase_a_deg: 30.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ControllerSection {
    pub f_c: f64,
    pub f_sol: f64,
    pub n_steps: usize,
    pub f_pwm: f64,
    pub n_periods: usize,
}

impl Default for ControllerSection {
    fn default() -> Self {
        Self { f_c: 20_000.0, f_sol: 100_000.0, n_steps: 5, f_pwm: 4_000.0, n_periods: 1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RlsSection {
    pub lambda: f64,
    pub m: usize,
    pub n_e: usize,
    pub delta: f64,
    pub epsilon: f64,
    pub f_e: f64,
}

impl Default for RlsSection {
    fn default() -> Self {
        let r = RlsConfig::baseline();
        Self { lambda: r.lambda, m: r.m, n_e: r.n_e, delta: r.delta, epsilon: r.epsilon, f_e: r.f_e }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShiftEntry {
    pub t_start: f64,
    pub t_end: f64,
    /// Load-resistance change in ohms.
    pub delta_r: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DisturbanceSection {
    pub shifts: Vec<ShiftEntry>,
}

impl Default for DisturbanceSection {
    fn default() -> Self {
        let shifts = DisturbanceProfile::baseline(CircuitParams::baseline().r_load_nominal)
            .intervals()
            .iter()
            .map(|s| ShiftEntry { t_start: s.t_start, t_end: s.t_end, delta_r: s.delta_r })
            .collect();
        Self { shifts }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MetricsSection {
    pub settle_fraction: f64,
    pub hold_window: f64,
    pub edge_window: f64,
}

impl Default for MetricsSection {
    fn default() -> Self {
        let m = MetricsConfig::default();
        Self { settle_fraction: m.settle_fraction, hold_window: m.hold_window, edge_window: m.edge_window }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    /// Simulated time in seconds.
    pub duration: f64,
}

impl Default for RunSection {
    fn default() -> Self {
        Self { duration: 0.1 }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub run: RunSection,
    pub circuit: CircuitSection,
    pub reference: ReferenceSection,
    pub controller: ControllerSection,
    pub rls: RlsSection,
    pub disturbance: DisturbanceSection,
    pub metrics: MetricsSection,
}

impl FileConfig {
    pub fn from_toml_str(text: &str, origin: &Path) -> Result<Self> {
        toml::from_str(text).map_err(|source| HarnessError::ConfigParse { path: origin.to_path_buf(), source })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        Self::from_toml_str(&text, path)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("plain data always serializes")
    }

    pub fn to_scenario(&self, mode: ControlMode, case: Case) -> Result<ScenarioConfig> {
        let invalid = |e: invmpc_core::Error| HarnessError::Validation(e.to_string());
        let c = &self.circuit;
        let circuit = CircuitParams {
            r_line: c.r_line,
            l_line: c.l_line,
            l1: c.l1,
            l2: c.l2,
            c: c.c,
            r_load_nominal: c.r_load,
            u_dc: c.u_dc,
        };
        let reference = ReferenceSpec::balanced(
            self.reference.amplitude,
            self.reference.frequency,
            self.reference.phase_a_deg.to_radians(),
        );
        let k = &self.controller;
        let horizon = HorizonConfig::new(k.n_steps, k.f_c, k.f_sol).map_err(invalid)?;
        let pwm = PwmConfig::new(k.f_pwm, k.n_periods, k.f_c).map_err(invalid)?;
        let r = &self.rls;
        let rls = RlsConfig { lambda: r.lambda, m: r.m, n_e: r.n_e, delta: r.delta, epsilon: r.epsilon, f_e: r.f_e };
        let disturbance = DisturbanceProfile::new(
            self.disturbance
                .shifts
                .iter()
                .map(|s| LoadShift { t_start: s.t_start, t_end: s.t_end, delta_r: s.delta_r })
                .collect(),
        )
        .map_err(invalid)?;
        let m = &self.metrics;
        let cfg = ScenarioConfig {
            mode,
            case,
            duration: self.run.duration,
            circuit,
            reference,
            horizon,
            pwm,
            rls,
            disturbance,
            metrics: MetricsConfig {
                settle_fraction: m.settle_fraction,
                hold_window: m.hold_window,
                edge_window: m.edge_window,
            },
        };
        cfg.validate().map_err(invalid)?;
        Ok(cfg)
    }
}
