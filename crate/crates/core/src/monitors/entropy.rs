use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::constitutive::viscosity_at;
use crate::error::{Error, Result};
use crate::solver::FluidState;
use crate::testbank::{space_bank, Bump};

/// Smoothing `alpha` of `S(u) = sqrt(u^2 + alpha)`.
pub const ABS_SMOOTHING: f64 = 1e-6;

/// Convex entropy `S(u)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntropyId {
    Square,
    AbsSmooth,
}

impl EntropyId {
    pub const ALL: [EntropyId; 2] = [EntropyId::Square, EntropyId::AbsSmooth];

    pub fn value(self, u: f64) -> f64 {
        match self {
            EntropyId::Square => u * u,
            EntropyId::AbsSmooth => (u * u + ABS_SMOOTHING).sqrt(),
        }
    }

    pub fn slope(self, u: f64) -> f64 {
        match self {
            EntropyId::Square => 2.0 * u,
            EntropyId::AbsSmooth => u / (u * u + ABS_SMOOTHING).sqrt(),
        }
    }
}

impl FromStr for EntropyId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "square" => Ok(EntropyId::Square),
            "abs_smooth" => Ok(EntropyId::AbsSmooth),
            other => Err(Error::Input(format!("unknown entropy '{other}'"))),
        }
    }
}

/// Running space-time weak residual of
/// `d_t(rho S(u)) + d_x(rho u S(u) - S'(u) lambda d_x u) <= 0`
/// against the tensor bump bank.
///
/// After step `k -> k+1` every bank member accumulates
/// `<a^{k+1} - a^k, phi^{k+1}> - dt <F^k, d_x phi^{k+1}>` with `a = rho S(u)`;
/// the defect is the largest positive partial sum seen so far. `d_x phi` is
/// taken as the face difference of `phi` over each cell.
#[derive(Debug, Clone)]
pub struct EntropyAccumulator {
    id: EntropyId,
    gamma: f64,
    h: f64,
    space: Vec<Bump>,
    time: Vec<Bump>,
    phi: Vec<Vec<f64>>,
    dphi: Vec<Vec<f64>>,
    sums: Vec<f64>,
    worst: f64,
}

impl EntropyAccumulator {
    pub fn new(id: EntropyId, initial: &FluidState, gamma: f64, window: (f64, f64), horizon: f64) -> Self {
        let space = space_bank(window.0, window.1);
        let xs = initial.rho.centers();
        let phi = space.iter().map(|b| xs.iter().map(|&x| b.value(x)).collect()).collect();
        // cell averages of d_x phi, so that constant fluxes telescope exactly
        let faces = initial.rho.faces();
        let h = initial.h();
        let dphi = space
            .iter()
            .map(|b| faces.windows(2).map(|f| (b.value(f[1]) - b.value(f[0])) / h).collect())
            .collect();
        let time: Vec<Bump> = crate::testbank::space_time_bank(window.0, window.1, horizon)
            .iter()
            .take(3)
            .map(|b| b.time)
            .collect();
        let sums = vec![0.0; space.len() * time.len()];
        Self {
            id,
            gamma,
            h,
            space,
            time,
            phi,
            dphi,
            sums,
            worst: 0.0,
        }
    }

    pub fn id(&self) -> EntropyId {
        self.id
    }

    pub fn accumulate(&mut self, old: &FluidState, new: &FluidState) {
        let s = self.id;
        let dt = new.t - old.t;
        let du = new.u.centered_diff();
        let n = old.cells();
        let mut da = vec![0.0; n];
        let mut flux = vec![0.0; n];
        for i in 0..n {
            let (r0, u0) = (old.rho.values[i], old.u.values[i]);
            let (r1, u1) = (new.rho.values[i], new.u.values[i]);
            da[i] = r1 * s.value(u1) - r0 * s.value(u0);
            flux[i] = r0 * u0 * s.value(u0) - s.slope(u1) * viscosity_at(r1, self.gamma) * du.values[i];
        }
        for (j, _) in self.space.iter().enumerate() {
            let mut spatial = 0.0;
            for i in 0..n {
                spatial += da[i] * self.phi[j][i] - dt * flux[i] * self.dphi[j][i];
            }
            spatial *= self.h;
            for (k, tb) in self.time.iter().enumerate() {
                let idx = j * self.time.len() + k;
                self.sums[idx] += tb.value(new.t) * spatial;
                self.worst = self.worst.max(self.sums[idx]);
            }
        }
    }

    /// Largest positive part of the residual over the bank and all steps.
    pub fn defect(&self) -> f64 {
        self.worst
    }

    /// Current residual for every bank member.
    pub fn residuals(&self) -> &[f64] {
        &self.sums
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridField;

    #[test]
    fn parses_known_ids_only() {
        assert_eq!("square".parse::<EntropyId>().unwrap(), EntropyId::Square);
        assert_eq!("abs_smooth".parse::<EntropyId>().unwrap(), EntropyId::AbsSmooth);
        assert!(matches!("cubic".parse::<EntropyId>(), Err(Error::Input(_))));
    }

    #[test]
    fn slopes_match_finite_differences() {
        for id in EntropyId::ALL {
            for u in [-0.7, -0.01, 0.0, 0.2, 1.3] {
                let e = 1e-6;
                let fd = (id.value(u + e) - id.value(u - e)) / (2.0 * e);
                assert!((fd - id.slope(u)).abs() < 1e-5, "{id:?} {u}");
            }
        }
    }

    #[test]
    fn uniform_translation_has_zero_defect() {
        let s0 = FluidState::new(
            0.0,
            GridField::constant(500, 0.01, 0.8),
            GridField::constant(500, 0.01, 0.3),
            [0.3, 0.3],
        )
        .unwrap();
        let mut s1 = s0.clone();
        s1.t = 0.05;
        for id in EntropyId::ALL {
            let mut acc = EntropyAccumulator::new(id, &s0, 10.0, (-1.25, 1.25), 1.0);
            acc.accumulate(&s0, &s1);
            assert!(acc.defect() < 1e-14, "{}", acc.defect());
        }
    }
}
