//! Time integration of the viscous approximation on `[-L, L]`.

mod initial;
mod run;
mod state;
mod step;

pub use initial::{make_initial, validate_initial, AdmissibilityReport, BoundCheck, InitialKind};
pub use run::{run, run_with, Formulation, RunOutput, StepMonitor};
pub use state::{FluidState, RwState, Trajectory};
pub use step::{
    cfl_limit, cfl_limit_rw, step_rw_detailed, step_rw_form, step_velocity_detailed, step_velocity_form, RwStepReport,
    StepReport, SPEED_FLOOR,
};
