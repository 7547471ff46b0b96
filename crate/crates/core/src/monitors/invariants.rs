use serde::Serialize;

use crate::params::Params;
use crate::solver::{Formulation, RunOutput};

use super::{local_density_cap, DiagnosticsRecord, MaxPrincipleTolerances};

/// Limits applied by [`RunReport::evaluate`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InvariantTolerances {
    pub mass: f64,
    pub energy: f64,
    pub momentum_rel: f64,
    /// Entropy defect relative to `E1`.
    pub entropy_rel: f64,
    pub max_principles: MaxPrincipleTolerances,
}

impl Default for InvariantTolerances {
    fn default() -> Self {
        Self {
            mass: 1e-10,
            energy: 0.05,
            momentum_rel: 1e-6,
            entropy_rel: 1e-2,
            max_principles: MaxPrincipleTolerances::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InvariantCheck {
    pub name: &'static str,
    /// Worst value over the run.
    pub measured: f64,
    pub bound: f64,
    pub pass: bool,
    pub applicable: bool,
}

impl InvariantCheck {
    fn new(name: &'static str, measured: f64, bound: f64) -> Self {
        Self {
            name,
            measured,
            bound,
            pass: measured <= bound,
            applicable: true,
        }
    }

    fn not_applicable(name: &'static str) -> Self {
        Self {
            name,
            measured: 0.0,
            bound: 0.0,
            pass: true,
            applicable: false,
        }
    }
}

/// Pass/fail of every run-level invariant.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub formulation: Formulation,
    pub checks: Vec<InvariantCheck>,
    pub pass: bool,
}

/// Largest growth of a series above its running minimum, relative to its
/// first value.
fn relative_growth(series: impl Iterator<Item = f64>) -> f64 {
    let mut low = f64::INFINITY;
    let mut first = None;
    let mut worst = 0.0_f64;
    for v in series {
        let base = *first.get_or_insert(v);
        low = low.min(v);
        worst = worst.max((v - low) / base.abs().max(1e-300));
    }
    worst
}

/// `max_t dxpi(t) / (mom_u(0) + mom_w(0))`, the L1 bound on `d_x pi`.
fn dxpi_ratio(records: &[DiagnosticsRecord]) -> f64 {
    let Some(first) = records.first() else {
        return 0.0;
    };
    let cap = (first.mom_u_l1 + first.mom_w_l1).max(1e-300);
    records.iter().map(|r| r.dxpi_l1 / cap).fold(0.0, f64::max)
}

fn worst(records: &[DiagnosticsRecord], f: impl Fn(&DiagnosticsRecord) -> f64) -> f64 {
    records.iter().map(f).fold(0.0, f64::max)
}

impl RunReport {
    /// The momentum norm is checked in the formulation whose balance law the
    /// scheme conserves: `rho u` for the velocity form, `rho w` for the
    /// desired-velocity form. `pi_x` is checked against the initial momenta.
    pub fn evaluate(out: &RunOutput, params: &Params, formulation: Formulation, tol: &InvariantTolerances) -> Self {
        let rec = &out.diagnostics;
        let adm = out.tracker.admissibility();
        let base = out.tracker.baseline();
        let mp = &tol.max_principles;
        let v_ref = base.v_sup.max(0.0);
        let failed_bounds = adm.checks.iter().filter(|c| c.applicable && !c.pass).count();
        let momentum_applicable = adm
            .checks
            .iter()
            .find(|c| c.name == "momentum_l1")
            .is_none_or(|c| c.applicable);

        let mut checks = vec![
            InvariantCheck::new("admissibility", failed_bounds as f64, 0.0),
            InvariantCheck::new("mass_conservation", worst(rec, |r| r.mass_defect.abs()), tol.mass),
            InvariantCheck::new("energy_identity", worst(rec, |r| r.energy_defect), tol.energy),
            InvariantCheck::new(
                "velocity_range",
                worst(rec, |r| (base.u_lo - r.u_min).max(r.u_max - base.u_hi)),
                mp.u,
            ),
            InvariantCheck::new(
                "active_potential_sup",
                worst(rec, |r| r.vn_sup - v_ref),
                mp.v_rel * v_ref + mp.v_abs,
            ),
            InvariantCheck::new("transported_potential_sup", worst(rec, |r| r.wn_sup - base.w_sup), mp.w),
            InvariantCheck::new("density_floor", worst(rec, |r| r.rho_min_bound - r.rho_min), mp.rho),
        ];
        let momentum: (&'static str, fn(&DiagnosticsRecord) -> f64) = match formulation {
            Formulation::Velocity => ("momentum_u_l1", |r| r.mom_u_l1),
            Formulation::DesiredVelocity => ("momentum_w_l1", |r| r.mom_w_l1),
        };
        if momentum_applicable {
            checks.push(InvariantCheck::new(
                momentum.0,
                relative_growth(rec.iter().map(momentum.1)),
                tol.momentum_rel,
            ));
            checks.push(InvariantCheck::new(
                "dxpi_l1_bound",
                dxpi_ratio(rec),
                1.0 + tol.momentum_rel,
            ));
        } else {
            checks.push(InvariantCheck::not_applicable(momentum.0));
            checks.push(InvariantCheck::not_applicable("dxpi_l1_bound"));
        }
        checks.push(InvariantCheck::new(
            "entropy",
            rec.last().map_or(0.0, |r| r.entropy_defect),
            tol.entropy_rel * out.tracker.e1(),
        ));
        let cap_excess = out
            .trajectory
            .snapshots
            .iter()
            .map(|s| {
                let c = local_density_cap(s, params);
                c.rho_max - c.cap
            })
            .fold(f64::MIN, f64::max);
        checks.push(InvariantCheck::new("local_density_cap", cap_excess, 1e-12));

        Self {
            formulation,
            pass: checks.iter().all(|c| c.pass),
            checks,
        }
    }

    pub fn first_failure(&self) -> Option<&InvariantCheck> {
        self.checks.iter().find(|c| !c.pass)
    }
}
