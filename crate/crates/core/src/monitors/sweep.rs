use serde::Serialize;

use crate::solver::RunOutput;

use super::energy_defect;

/// Relative slack allowed between consecutive switching residuals.
pub const SWEEP_SLACK: f64 = 0.05;

/// One row of a stiffness sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub gamma: f64,
    /// Switching residual at the final time.
    pub switching_l1: f64,
    pub rho_max: f64,
    /// Largest `max D_c u` over the run.
    pub oslc: f64,
    pub energy_defect: f64,
}

impl SweepRow {
    pub fn from_run(gamma: f64, out: &RunOutput) -> Self {
        let last = out.last_record();
        Self {
            gamma,
            switching_l1: last.switching_l1,
            rho_max: out.diagnostics.iter().map(|r| r.rho_max).fold(f64::MIN, f64::max),
            oslc: out.diagnostics.iter().map(|r| r.oslc).fold(f64::MIN, f64::max),
            energy_defect: energy_defect(&out.diagnostics),
        }
    }

    pub const HEADER: &'static str = "gamma,switching_L1,rho_max,oslc,energy_defect";

    pub fn csv_row(&self) -> String {
        format!(
            "{:e},{:e},{:e},{:e},{:e}",
            self.gamma, self.switching_l1, self.rho_max, self.oslc, self.energy_defect
        )
    }
}

/// First index `k` with `switching_l1[k] > (1 + slack) switching_l1[k - 1]`.
pub fn switching_trend_violation(rows: &[SweepRow], slack: f64) -> Option<usize> {
    rows.windows(2)
        .position(|w| w[1].switching_l1 > (1.0 + slack) * w[0].switching_l1)
        .map(|k| k + 1)
}
