use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Physical, numerical and admissibility parameters of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Params {
    /// Stiffness exponent of the offset `p(rho) = rho^gamma`.
    pub gamma: f64,
    /// Background density prescribed at infinity.
    pub rho_bar: f64,
    /// Half-width `L` of the truncated domain `[-L, L]`.
    pub half_width: f64,
    /// Number of cells `N`.
    pub cells: usize,
    /// Advective CFL number.
    pub cfl: f64,
    /// Time horizon `T`.
    pub horizon: f64,
    /// Momentum-bound constant `C`.
    pub c_mom: f64,
    /// Initial density floor `r0`.
    pub r0: f64,
    /// Initial sup of `d_x w / rho`; measured from the datum when absent.
    pub m0: Option<f64>,
}

impl Default for Params {
    fn default() -> Self {
        Self {
            gamma: 10.0,
            rho_bar: 0.8,
            half_width: 5.0,
            cells: 800,
            cfl: 0.25,
            horizon: 0.5,
            c_mom: 1.0,
            r0: 0.8,
            m0: None,
        }
    }
}

impl Params {
    pub fn h(&self) -> f64 {
        2.0 * self.half_width / self.cells as f64
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidParams(msg));
        if !(self.gamma >= 1.0 && self.gamma.is_finite()) {
            return fail(format!("gamma must be >= 1, got {}", self.gamma));
        }
        if !(self.rho_bar > 0.0 && self.rho_bar <= 1.0) {
            return fail(format!("rho_bar must lie in (0, 1], got {}", self.rho_bar));
        }
        if !(self.r0 > 0.0 && self.r0 <= self.rho_bar) {
            return fail(format!(
                "r0 must lie in (0, rho_bar = {}], got {}",
                self.rho_bar, self.r0
            ));
        }
        if self.cells < 8 {
            return fail(format!("N must be >= 8, got {}", self.cells));
        }
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return fail(format!("cfl must lie in (0, 1], got {}", self.cfl));
        }
        if !(self.half_width > 0.0 && self.half_width.is_finite()) {
            return fail(format!("L must be positive, got {}", self.half_width));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return fail(format!("T must be positive, got {}", self.horizon));
        }
        if !(self.c_mom > 0.0 && self.c_mom.is_finite()) {
            return fail(format!("C must be positive, got {}", self.c_mom));
        }
        if let Some(m0) = self.m0 {
            if !m0.is_finite() {
                return fail(format!("M0 must be finite, got {m0}"));
            }
        }
        Ok(())
    }

    /// Upper density bound `(1 + C)^(1/(gamma+1))` for admissible data.
    pub fn density_cap(&self) -> f64 {
        (1.0 + self.c_mom).powf(1.0 / (self.gamma + 1.0))
    }

    /// Observation window `[-L/2, L/2]` used for local quantities.
    pub fn observation_window(&self) -> (f64, f64) {
        (-0.5 * self.half_width, 0.5 * self.half_width)
    }
}
