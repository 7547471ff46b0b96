use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::monitors::{DiagnosticsRecord, DiagnosticsTracker};
use crate::params::Params;

use super::state::{FluidState, RwState, Trajectory};
use super::step::{cfl_limit, cfl_limit_rw, step_rw_detailed, step_velocity_detailed, StepReport};

/// Which of the two equivalent formulations advances the state.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Formulation {
    /// Conservative in `(rho, rho u)` with implicit viscosity.
    #[default]
    Velocity,
    /// Conservative in `(rho, rho w)` with implicit density diffusion.
    DesiredVelocity,
}

/// Extra per-step check run after the built-in positivity check.
pub trait StepMonitor {
    fn name(&self) -> &str;

    /// Returns a description of the violation, if any.
    fn check(&mut self, state: &FluidState, record: &DiagnosticsRecord) -> std::result::Result<(), String>;
}

/// Output of `run`.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub trajectory: Trajectory,
    pub diagnostics: Vec<DiagnosticsRecord>,
    pub tracker: DiagnosticsTracker,
}

impl RunOutput {
    pub fn last_record(&self) -> &DiagnosticsRecord {
        self.diagnostics.last().expect("at least the initial record")
    }
}

/// Advances `initial` with the velocity formulation up to the last output
/// time (or `params.horizon` when none are given), recording diagnostics at
/// every step and snapshots at every output time.
pub fn run(
    initial: &FluidState,
    params: &Params,
    monitors: &mut [Box<dyn StepMonitor>],
    output_times: &[f64],
) -> Result<RunOutput> {
    run_with(Formulation::Velocity, initial, params, monitors, output_times)
}

/// Step-size reductions tried when the outflow bound of the `(rho, w)` step
/// rejects the CFL step.
const MAX_RETRIES: usize = 30;

enum Stepper {
    Velocity(FluidState),
    Rw(RwState),
}

impl Stepper {
    fn limit(&self, params: &Params) -> Result<f64> {
        match self {
            Stepper::Velocity(s) => Ok(cfl_limit(s, params)),
            Stepper::Rw(s) => cfl_limit_rw(s, params),
        }
    }

    fn t(&self) -> f64 {
        match self {
            Stepper::Velocity(s) => s.t,
            Stepper::Rw(s) => s.t,
        }
    }

    fn advance(&mut self, params: &Params, dt: f64, target: f64) -> Result<StepReport> {
        let snap = |t: f64| {
            if (t - target).abs() <= 1e-12 * target.abs().max(1.0) {
                target
            } else {
                t
            }
        };
        match self {
            Stepper::Velocity(s) => {
                let mut rep = step_velocity_detailed(s, params, dt)?;
                rep.state.t = snap(rep.state.t);
                *s = rep.state.clone();
                Ok(rep)
            }
            Stepper::Rw(s) => {
                let mut dt = dt;
                let mut attempt = 0;
                let mut rep = loop {
                    match step_rw_detailed(s, params, dt) {
                        Err(Error::StepSize { limit, .. }) if attempt < MAX_RETRIES && limit > 0.0 => {
                            dt = 0.9 * limit;
                            attempt += 1;
                        }
                        other => break other?,
                    }
                };
                rep.state.t = snap(rep.state.t);
                *s = rep.state.clone();
                Ok(StepReport {
                    state: rep.state.to_velocity_form(params.gamma)?,
                    mass_influx: rep.mass_influx,
                    energy_influx: rep.energy_influx,
                })
            }
        }
    }
}

/// `run` with a choice of formulation; snapshots and diagnostics are always
/// expressed in `(rho, u)`.
pub fn run_with(
    formulation: Formulation,
    initial: &FluidState,
    params: &Params,
    monitors: &mut [Box<dyn StepMonitor>],
    output_times: &[f64],
) -> Result<RunOutput> {
    params.validate()?;
    let mut outputs: Vec<f64> = output_times.to_vec();
    if outputs.is_empty() {
        outputs.push(params.horizon);
    }
    if outputs.iter().any(|t| !t.is_finite() || *t < initial.t) {
        return Err(Error::Input(format!(
            "output times {outputs:?} precede the initial time"
        )));
    }
    if outputs.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Input("output times must be strictly increasing".into()));
    }

    let mut tracker = DiagnosticsTracker::new(initial, params)?;
    let mut diagnostics = vec![tracker.record(0, 0.0, initial)?];
    let mut trajectory = Trajectory::new(params.clone(), initial.clone());
    for m in monitors.iter_mut() {
        m.check(initial, &diagnostics[0])
            .map_err(|detail| monitor_error(0, m.name(), detail))?;
    }

    let mut stepper = match formulation {
        Formulation::Velocity => Stepper::Velocity(initial.clone()),
        Formulation::DesiredVelocity => Stepper::Rw(initial.to_rw(params.gamma)?),
    };
    let mut state = initial.clone();
    let mut next_out = outputs.iter().position(|&t| t > state.t);
    let mut step = 0usize;
    while let Some(k) = next_out {
        let target = outputs[k];
        let mut dt = stepper.limit(params)?;
        if stepper.t() + dt >= target {
            dt = target - stepper.t();
        }
        step += 1;
        let report = stepper.advance(params, dt, target).map_err(|e| match e {
            Error::Domain { field, cell, value } => {
                monitor_error(step, "positivity", format!("{field} = {value} at cell {cell}"))
            }
            other => other,
        })?;
        let record = tracker.advance(step, &state, &report)?;
        if !record.is_finite() {
            return Err(monitor_error(step, "finite_diagnostics", format!("{record:?}")));
        }
        let new = report.state;
        for m in monitors.iter_mut() {
            m.check(&new, &record)
                .map_err(|detail| monitor_error(step, m.name(), detail))?;
        }
        diagnostics.push(record);
        state = new;
        if state.t >= target {
            trajectory.push(state.clone())?;
            next_out = if k + 1 < outputs.len() { Some(k + 1) } else { None };
        }
    }
    Ok(RunOutput {
        trajectory,
        diagnostics,
        tracker,
    })
}

fn monitor_error(step: usize, invariant: &str, detail: String) -> Error {
    Error::Monitor {
        step,
        invariant: invariant.to_string(),
        detail,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::{make_initial, InitialKind};

    #[test]
    fn zero_horizon_returns_the_initial_state() {
        let p = Params {
            cells: 64,
            ..Params::default()
        };
        let s = make_initial(&InitialKind::Equilibrium, &p).unwrap();
        let out = run(&s, &p, &mut [], &[0.0]).unwrap();
        assert_eq!(out.trajectory.snapshots.len(), 1);
        assert_eq!(out.diagnostics.len(), 1);
    }

    #[test]
    fn equilibrium_diagnostics_are_constant() {
        let p = Params {
            cells: 64,
            horizon: 1.0,
            ..Params::default()
        };
        let s = make_initial(&InitialKind::Equilibrium, &p).unwrap();
        let out = run(&s, &p, &mut [], &[0.5, 1.0]).unwrap();
        assert_eq!(out.trajectory.times(), vec![0.0, 0.5, 1.0]);
        let first = &out.diagnostics[0];
        for r in &out.diagnostics {
            assert_eq!(r.switching_l1, first.switching_l1);
            assert_eq!(r.e_kinetic, 0.0);
            assert_eq!(r.e_dissipated, 0.0);
            assert_eq!(r.mass_defect, 0.0);
            assert_eq!(r.rho_min, first.rho_min);
            assert_eq!(r.entropy_defect, 0.0);
            assert_eq!(r.pi_consistency, 0.0);
        }
    }

    struct Never;
    impl StepMonitor for Never {
        fn name(&self) -> &str {
            "never"
        }
        fn check(&mut self, state: &FluidState, _: &DiagnosticsRecord) -> std::result::Result<(), String> {
            if state.t > 0.0 {
                Err("always fails after the start".into())
            } else {
                Ok(())
            }
        }
    }

    #[test]
    fn monitor_failure_names_step_and_invariant() {
        let p = Params {
            cells: 32,
            ..Params::default()
        };
        let s = make_initial(&InitialKind::Equilibrium, &p).unwrap();
        let mut mons: Vec<Box<dyn StepMonitor>> = vec![Box::new(Never)];
        match run(&s, &p, &mut mons, &[]) {
            Err(Error::Monitor { step, invariant, .. }) => {
                assert_eq!(step, 1);
                assert_eq!(invariant, "never");
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
