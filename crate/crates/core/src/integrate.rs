//! Time integration: Dormand–Prince 4(5) and fixed-step RK4 for the small
//! parameter ODE systems, and ETDRK4 for the stiff spectral DNS systems.
//!
//! Both integrators are deterministic for a fixed configuration and emit
//! trajectories sampled at a fixed output stride. Integration failures —
//! a state leaving the admissible region, step-size underflow, or a DNS
//! blow-up — are structured [`HaltEvent`]s carried on the (partial)
//! trajectory rather than errors, so diagnostics over the valid prefix
//! remain possible.

mod etd;
mod ode;

pub use etd::{integrate_etd, EtdSolverConfig};
pub use ode::{integrate_ode, OdeMethod, OdeSolverConfig};

use crate::ansatz::ParameterState;
use crate::grid::ComplexField;

/// Why an integration stopped before reaching its final time.
#[derive(Debug, Clone, PartialEq)]
pub struct HaltEvent {
    /// Last time with a valid state.
    pub time: f64,
    pub reason: HaltReason,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum HaltReason {
    /// The parameter vector left the admissible region (e.g. L ≤ 0).
    Inadmissible(String),
    /// The adaptive controller drove the step size below resolution.
    StepSizeUnderflow,
    /// A DNS field stopped being finite or exceeded the amplitude guard.
    BlowUp,
}

impl std::fmt::Display for HaltReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Inadmissible(why) => write!(f, "inadmissible state: {why}"),
            Self::StepSizeUnderflow => write!(f, "step size underflow"),
            Self::BlowUp => write!(f, "solution blow-up"),
        }
    }
}

/// Time series of parameter states (a ROM trajectory).
#[derive(Debug, Clone)]
pub struct ParameterTrajectory {
    pub times: Vec<f64>,
    pub states: Vec<ParameterState>,
    pub halt: Option<HaltEvent>,
}

impl ParameterTrajectory {
    pub fn last(&self) -> &ParameterState {
        self.states.last().expect("trajectories contain the initial state")
    }

    pub fn completed(&self) -> bool {
        self.halt.is_none()
    }
}

/// Time series of DNS field snapshots.
#[derive(Debug, Clone)]
pub struct FieldTrajectory {
    pub times: Vec<f64>,
    pub snapshots: Vec<ComplexField>,
    pub halt: Option<HaltEvent>,
}

impl FieldTrajectory {
    pub fn last(&self) -> &ComplexField {
        self.snapshots.last().expect("trajectories contain the initial field")
    }

    pub fn completed(&self) -> bool {
        self.halt.is_none()
    }
}
