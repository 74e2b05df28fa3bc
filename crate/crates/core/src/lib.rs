//! Finite-control-set receding-horizon control of a three-phase DC-AC
//! inverter, modeled per phase as a three-mode hybrid automaton.
//!
//! Everything in this crate is pure computation over `alloc` containers; the
//! `invmpc` crate layers file formats, the CLI, and thread-level parallelism
//! on top.
//!
//! Module map:
//!
//! - [`circuit`]: electrical constants, per-mode affine dynamics, output signals.
//! - [`automaton`]: control-symbol coding, mode transitions with the reset map,
//!   decoding to switch states.
//! - [`plant`]: exact discretization of the affine dynamics and the true plant
//!   with its load-shift disturbance.
//! - [`odcm`]: exhaustive N-step search over all mode sequences.
//! - [`opcm`]: the same search restricted to quantized duty-ratio triples.
//! - [`rls`]: disturbance sampling and the recursive least-squares forecaster.
//! - [`closed_loop`] and [`metrics`]: per-phase closed-loop runs and
//!   tracking-error statistics.

#![cfg_attr(not(test), no_std)]
#![forbid(unsafe_code)]
// Small dense matrix kernels read best with explicit indices.
#![allow(clippy::needless_range_loop)]

extern crate alloc;

pub mod automaton;
pub mod circuit;
pub mod closed_loop;
mod error;
pub mod linalg;
pub mod metrics;
pub mod odcm;
pub mod opcm;
pub mod plant;
pub mod rls;

pub use automaton::{apply_transition, decode_to_switches, Automaton, ControlSymbol, SwitchStates};
pub use circuit::{
    dynamics_for_mode, outputs, AffineDynamics, CircuitParams, OutputSignals, PhaseId, PhaseState, SwitchMode,
};
pub use closed_loop::{run_phase, Case, ControlMode, LogRow, PhaseRun, ScenarioConfig};
pub use error::{Error, Result};
pub use metrics::{compute_metrics, EdgePeak, MetricsConfig, PhaseMetrics};
pub use odcm::{
    predict_trajectory, reference_window, select_control, solve_odcm, ControlSequence, HorizonConfig, OdcmSolution,
    ReferenceSpec,
};
pub use opcm::{
    enumerate_duty_candidates, expand_duty_to_beats, predict_pwm_period, select_duty, solve_opcm, DutyTriple,
    OpcmSolution, PwmConfig,
};
pub use plant::{exact_step, plant_advance, Discretizer, DisturbanceProfile, LoadShift, SolverConfig, StepMatrices};
pub use rls::{sample_disturbance, DisturbanceSample, RlsConfig, RlsState};
