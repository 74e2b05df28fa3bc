//! Discrete side of the per-phase hybrid automaton: control-symbol coding,
//! transitions with the reset map, and decoding to switch states.
//!
//! Every ordered mode pair is an admissible execution, so transitions never
//! block. They fire only at controller timings; there are no state-dependent
//! guards.

use crate::circuit::{PhaseState, SwitchMode};

/// Control symbol `j`: "enter mode `m_j`" from whatever mode is active.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
#[repr(u8)]
pub enum ControlSymbol {
    One = 1,
    Two = 2,
    #[default]
    Three = 3,
}

impl ControlSymbol {
    /// Enumeration order used by the controllers.
    pub const ALL: [ControlSymbol; 3] = [ControlSymbol::One, ControlSymbol::Two, ControlSymbol::Three];

    pub fn value(self) -> u8 {
        self as u8
    }

    pub fn from_value(v: u8) -> Option<Self> {
        match v {
            1 => Some(ControlSymbol::One),
            2 => Some(ControlSymbol::Two),
            3 => Some(ControlSymbol::Three),
            _ => None,
        }
    }

    pub fn target_mode(self) -> SwitchMode {
        match self {
            ControlSymbol::One => SwitchMode::M1,
            ControlSymbol::Two => SwitchMode::M2,
            ControlSymbol::Three => SwitchMode::M3,
        }
    }

    pub fn for_mode(mode: SwitchMode) -> Self {
        match mode {
            SwitchMode::M1 => ControlSymbol::One,
            SwitchMode::M2 => ControlSymbol::Two,
            SwitchMode::M3 => ControlSymbol::Three,
        }
    }
}

/// Gate signals of one leg. Only reachable through [`decode_to_switches`],
/// so both-on cannot be constructed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct SwitchStates {
    s_up: bool,
    s_down: bool,
}

impl SwitchStates {
    pub fn s_up(&self) -> bool {
        self.s_up
    }

    pub fn s_down(&self) -> bool {
        self.s_down
    }
}

/// Switch into the mode named by `sigma`. Entering `m3` clamps `i1` to zero;
/// every other transition leaves the continuous state untouched.
pub fn apply_transition(state: PhaseState, sigma: ControlSymbol) -> PhaseState {
    let mut next = state;
    next.mode = sigma.target_mode();
    if sigma == ControlSymbol::Three {
        next.x[0] = 0.0;
    }
    next
}

pub fn decode_to_switches(sigma: ControlSymbol) -> SwitchStates {
    match sigma {
        ControlSymbol::One => SwitchStates { s_up: true, s_down: false },
        ControlSymbol::Two => SwitchStates { s_up: false, s_down: true },
        ControlSymbol::Three => SwitchStates { s_up: false, s_down: false },
    }
}

/// Structural description of the per-phase automaton.
#[derive(Debug, Clone, Copy, Default)]
pub struct Automaton;

impl Automaton {
    pub const MODES: [SwitchMode; 3] = SwitchMode::ALL;

    /// All nine ordered (source, target) pairs, self-transitions included.
    pub fn executions() -> impl Iterator<Item = (SwitchMode, SwitchMode)> {
        SwitchMode::ALL.into_iter().flat_map(|from| SwitchMode::ALL.into_iter().map(move |to| (from, to)))
    }

    pub fn initial_state() -> PhaseState {
        PhaseState::initial()
    }
}
