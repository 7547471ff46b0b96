use serde::{Deserialize, Serialize};

use crate::constitutive;
use crate::error::{Error, Result};
use crate::grid::GridField;
use crate::params::Params;

/// Grid samples of density and velocity at one time instant.
///
/// `far_u` holds the far-field velocity imposed in the left and right ghost
/// cells; the ghost density is always the background `rho_bar`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FluidState {
    pub t: f64,
    pub rho: GridField,
    pub u: GridField,
    pub far_u: [f64; 2],
}

impl FluidState {
    pub fn new(t: f64, rho: GridField, u: GridField, far_u: [f64; 2]) -> Result<Self> {
        rho.same_grid(&u)?;
        if let Some(cell) = rho.values.iter().position(|&r| !(r > 0.0)) {
            return Err(Error::Domain {
                field: "density",
                cell,
                value: rho.values[cell],
            });
        }
        if !far_u.iter().all(|v| v.is_finite()) {
            return Err(Error::Input(format!("far-field velocity {far_u:?} is not finite")));
        }
        Ok(Self { t, rho, u, far_u })
    }

    /// Uses the outermost velocity samples as far-field values.
    pub fn with_extrapolated_far_field(t: f64, rho: GridField, u: GridField) -> Result<Self> {
        let far = [
            u.values.first().copied().unwrap_or(0.0),
            u.values.last().copied().unwrap_or(0.0),
        ];
        Self::new(t, rho, u, far)
    }

    pub fn cells(&self) -> usize {
        self.rho.len()
    }

    pub fn h(&self) -> f64 {
        self.rho.h
    }

    /// Largest advective speed including the ghost values.
    pub fn max_speed(&self) -> f64 {
        self.u.sup_norm().max(self.far_u[0].abs()).max(self.far_u[1].abs())
    }

    pub fn desired_velocity(&self, gamma: f64) -> Result<GridField> {
        constitutive::desired_velocity(&self.rho, &self.u, gamma)
    }

    pub fn potential(&self, gamma: f64) -> Result<GridField> {
        constitutive::potential(&self.rho, gamma)
    }

    pub fn momentum(&self) -> GridField {
        GridField {
            values: self.rho.values.iter().zip(&self.u.values).map(|(r, u)| r * u).collect(),
            h: self.rho.h,
        }
    }

    pub fn generalized_momentum(&self, gamma: f64) -> Result<GridField> {
        let pi = self.potential(gamma)?;
        constitutive::generalized_momentum(&self.rho, &self.u, &pi)
    }

    pub fn active_potential(&self, gamma: f64) -> Result<GridField> {
        constitutive::active_potential(&self.rho, &self.u, gamma)
    }

    pub fn transported_potential(&self, gamma: f64) -> Result<GridField> {
        let w = self.desired_velocity(gamma)?;
        constitutive::transported_potential(&self.rho, &w)
    }

    pub fn to_rw(&self, gamma: f64) -> Result<RwState> {
        Ok(RwState {
            t: self.t,
            rho: self.rho.clone(),
            w: self.desired_velocity(gamma)?,
            far_u: self.far_u,
        })
    }
}

/// State of the `(rho, w)` formulation; `u = w - D_c p(rho)` is recovered on
/// demand.
#[derive(Debug, Clone, PartialEq)]
pub struct RwState {
    pub t: f64,
    pub rho: GridField,
    pub w: GridField,
    pub far_u: [f64; 2],
}

impl RwState {
    pub fn velocity(&self, gamma: f64) -> Result<GridField> {
        let dp = constitutive::offset(&self.rho, gamma)?.centered_diff();
        self.w.zip_map(&dp, |w, d| w - d)
    }

    pub fn to_velocity_form(&self, gamma: f64) -> Result<FluidState> {
        FluidState::new(self.t, self.rho.clone(), self.velocity(gamma)?, self.far_u)
    }
}

/// Snapshots of a run at its output times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub params: Params,
    pub snapshots: Vec<FluidState>,
}

impl Trajectory {
    pub fn new(params: Params, initial: FluidState) -> Self {
        Self {
            params,
            snapshots: vec![initial],
        }
    }

    pub fn push(&mut self, state: FluidState) -> Result<()> {
        let last = self.snapshots.last().expect("trajectory is never empty");
        if !(state.t > last.t) {
            return Err(Error::Input(format!(
                "snapshot time {} does not follow {}",
                state.t, last.t
            )));
        }
        last.rho.same_grid(&state.rho)?;
        self.snapshots.push(state);
        Ok(())
    }

    pub fn initial(&self) -> &FluidState {
        &self.snapshots[0]
    }

    pub fn last(&self) -> &FluidState {
        self.snapshots.last().expect("trajectory is never empty")
    }

    pub fn times(&self) -> Vec<f64> {
        self.snapshots.iter().map(|s| s.t).collect()
    }
}
