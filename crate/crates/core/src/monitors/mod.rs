//! Discrete versions of the a priori estimates, evaluated on solver states.

mod companion;
mod entropy;
mod invariants;
mod record;
mod sweep;
mod tracker;

pub use companion::PiCompanion;
pub use entropy::{EntropyAccumulator, EntropyId, ABS_SMOOTHING};
pub use invariants::{InvariantCheck, InvariantTolerances, RunReport};
pub use record::{DiagnosticsRecord, COLUMNS};
pub use sweep::{switching_trend_violation, SweepRow, SWEEP_SLACK};
pub use tracker::DiagnosticsTracker;

use serde::Serialize;

use crate::constitutive::{offset, potential_at, power};
use crate::error::Result;
use crate::params::Params;
use crate::solver::{AdmissibilityReport, FluidState};

/// Discrete L1 norms of `rho u`, `rho w` and `rho D_c p`.
///
/// `rho D_c p` is the discrete form of `d_x pi = rho d_x p`; since
/// `rho w = rho u + rho D_c p` cellwise, `dxpi <= mom_u + mom_w` is exact.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentumL1 {
    pub mom_u: f64,
    pub mom_w: f64,
    pub dxpi: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentumCheck {
    pub mom_u: bool,
    pub mom_w: bool,
    pub dxpi: bool,
}

impl MomentumCheck {
    pub fn all(&self) -> bool {
        self.mom_u && self.mom_w && self.dxpi
    }
}

impl MomentumL1 {
    /// Each norm against its initial value, `dxpi` against the initial
    /// `mom_u + mom_w`; `tol_rel` is relative to the initial value.
    pub fn check(&self, initial: &MomentumL1, tol_rel: f64) -> MomentumCheck {
        let ok = |now: f64, then: f64| now <= then * (1.0 + tol_rel) + 1e-14;
        MomentumCheck {
            mom_u: ok(self.mom_u, initial.mom_u),
            mom_w: ok(self.mom_w, initial.mom_w),
            dxpi: ok(self.dxpi, initial.mom_u + initial.mom_w),
        }
    }
}

pub fn momentum_l1(state: &FluidState, params: &Params) -> Result<MomentumL1> {
    let dp = offset(&state.rho, params.gamma)?.centered_diff();
    let w = state.desired_velocity(params.gamma)?;
    let h = state.h();
    let rho = &state.rho.values;
    Ok(MomentumL1 {
        mom_u: state.momentum().l1_norm(),
        mom_w: rho.iter().zip(&w.values).map(|(r, w)| (r * w).abs() * h).sum(),
        dxpi: rho.iter().zip(&dp.values).map(|(r, d)| (r * d).abs() * h).sum(),
    })
}

/// `max_i D_c u_i`.
pub fn oslc_sup(state: &FluidState) -> f64 {
    state.u.centered_diff().max()
}

/// `sum |(1 - rho) pi| h` over the observation window.
pub fn switching_residual(state: &FluidState, params: &Params) -> f64 {
    let (a, b) = params.observation_window();
    let h = state.h();
    state.rho.values[state.rho.window(a, b)]
        .iter()
        .map(|&r| ((1.0 - r) * potential_at(r, params.gamma)).abs() * h)
        .sum()
}

/// `sum H(rho | rho_bar) h` with
/// `H(rho | r) = (rho^(g+1) - r^(g+1)) / (g+1) - (rho - r) r^g`.
pub fn relative_energy(state: &FluidState, params: &Params) -> f64 {
    let g = params.gamma;
    let rb = params.rho_bar;
    let hb = power(rb, g + 1.0) / (g + 1.0);
    let pb = power(rb, g);
    state
        .rho
        .values
        .iter()
        .map(|&r| (power(r, g + 1.0) / (g + 1.0) - hb - (r - rb) * pb) * state.h())
        .sum()
}

/// Local bound on the density via `W^{1,1}(K) -> L^inf(K)` applied to `pi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DensityCap {
    pub pi_l1: f64,
    pub dxpi_l1: f64,
    pub rho_max: f64,
    /// `((g+1)/g (|pi|_{L1(K)} / |K| + TV_K(pi)))^(1/(g+1))`.
    pub cap: f64,
}

impl DensityCap {
    pub fn pass(&self) -> bool {
        self.rho_max <= self.cap * (1.0 + 1e-12)
    }
}

pub fn local_density_cap(state: &FluidState, params: &Params) -> DensityCap {
    let g = params.gamma;
    let (a, b) = params.observation_window();
    let range = state.rho.window(a, b);
    let h = state.h();
    let pi: Vec<f64> = state.rho.values[range.clone()]
        .iter()
        .map(|&r| potential_at(r, g))
        .collect();
    let pi_l1: f64 = pi.iter().map(|p| p.abs() * h).sum();
    let tv: f64 = pi.windows(2).map(|w| (w[1] - w[0]).abs()).sum();
    let width = pi.len() as f64 * h;
    let rho_max = state.rho.values[range].iter().copied().fold(f64::MIN, f64::max);
    let k = (g + 1.0) / g * (pi_l1 / width + tv);
    DensityCap {
        pi_l1,
        dxpi_l1: tv,
        rho_max,
        cap: power(k, 1.0 / (g + 1.0)),
    }
}

/// Tolerances of the four maximum principles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MaxPrincipleTolerances {
    pub u: f64,
    pub v_rel: f64,
    pub v_abs: f64,
    pub w: f64,
    pub rho: f64,
}

impl Default for MaxPrincipleTolerances {
    fn default() -> Self {
        Self {
            u: 1e-3,
            v_rel: 1e-3,
            v_abs: 1e-6,
            w: 1e-3,
            rho: 1e-3,
        }
    }
}

/// Initial-time quantities the maximum principles compare against.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MaxPrincipleBaseline {
    pub u_lo: f64,
    pub u_hi: f64,
    pub v_sup: f64,
    pub w_sup: f64,
    pub r0: f64,
    pub m0: f64,
}

impl MaxPrincipleBaseline {
    pub fn new(initial: &FluidState, report: &AdmissibilityReport, gamma: f64) -> Result<Self> {
        Ok(Self {
            u_lo: initial.u.min().min(0.0),
            u_hi: initial.u.max().max(0.0),
            v_sup: report.sup_v0,
            w_sup: initial.transported_potential(gamma)?.max(),
            r0: report.r0,
            m0: report.m0,
        })
    }

    pub fn density_floor(&self, t: f64) -> f64 {
        1.0 / (self.m0 * t + 1.0 / self.r0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MaxPrincipleReport {
    pub u_range: bool,
    pub v_sup: bool,
    pub w_sup: bool,
    pub rho_floor: bool,
    pub u_min: f64,
    pub u_max: f64,
    pub v_max: f64,
    pub w_max: f64,
    pub rho_min: f64,
}

impl MaxPrincipleReport {
    pub fn all(&self) -> bool {
        self.u_range && self.v_sup && self.w_sup && self.rho_floor
    }

    /// Name of the first violated principle.
    pub fn first_failure(&self) -> Option<&'static str> {
        [
            (self.u_range, "velocity_range"),
            (self.v_sup, "active_potential_sup"),
            (self.w_sup, "transported_potential_sup"),
            (self.rho_floor, "density_floor"),
        ]
        .into_iter()
        .find(|(ok, _)| !ok)
        .map(|(_, name)| name)
    }
}

pub fn max_principles(
    state: &FluidState,
    base: &MaxPrincipleBaseline,
    gamma: f64,
    tol: &MaxPrincipleTolerances,
) -> Result<MaxPrincipleReport> {
    let u_min = state.u.min();
    let u_max = state.u.max();
    let v_max = state.active_potential(gamma)?.max();
    let w_max = state.transported_potential(gamma)?.max();
    let rho_min = state.rho.min();
    let v_ref = base.v_sup.max(0.0);
    Ok(MaxPrincipleReport {
        u_range: u_min >= base.u_lo - tol.u && u_max <= base.u_hi + tol.u,
        v_sup: v_max <= v_ref + tol.v_rel * v_ref.abs() + tol.v_abs,
        w_sup: w_max <= base.w_sup + tol.w,
        rho_floor: rho_min >= base.density_floor(state.t) - tol.rho,
        u_min,
        u_max,
        v_max,
        w_max,
        rho_min,
    })
}

/// Largest relative energy defect over the records.
pub fn energy_defect(records: &[DiagnosticsRecord]) -> f64 {
    records.iter().map(|r| r.energy_defect).fold(0.0, f64::max)
}
