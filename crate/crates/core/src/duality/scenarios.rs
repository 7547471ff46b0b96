//! Packaged duality experiments with their pass/fail bounds.

use serde::Serialize;

use crate::corpus::velocity_corpus;
use crate::error::{Error, Result};
use crate::solver::Trajectory;
use crate::testbank::hat_bank;

use super::flow::filippov_flow;
use super::measure::{pushforward, Measure1D};
use super::reversible::{duality_residual, MeasureTrajectory};
use super::velocity::VelocityField;

/// Frozen constant of the bound `duality_residual <= K (h + sub-step)`.
pub const DUALITY_K: f64 = 1.0;

/// Factor of the bound `10 h sup|u| TV(bank)` for solver trajectories.
pub const WEAK_DUALITY_FACTOR: f64 = 10.0;

/// Threshold the frozen non-solution must exceed.
pub const NON_SOLUTION_THRESHOLD: f64 = 0.1;

const ATOM_MASS_TOL: f64 = 0.02;

fn sign_field(half_width: f64, intervals: usize) -> Result<VelocityField> {
    VelocityField::steady(VelocityField::lattice(half_width, intervals), 0.0, |x| {
        if x == 0.0 {
            0.0
        } else {
            -x.signum()
        }
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SignFlowReport {
    pub intervals: usize,
    pub h: f64,
    pub substep: f64,
    /// Max-norm distance to `sgn(x) max(|x| - t, 0)` over `[0, 1]`.
    pub flow_error: f64,
    pub flow_tol: f64,
    /// Atom mass within `h` of the origin at `t = 0.5`.
    pub atom_mass: f64,
    pub atom_mass_tol: f64,
    pub pass: bool,
}

/// `u = -sgn(x)` on `[-2, 2]`: flow against the closed form on `[0, 1]` and
/// the atom formed by Lebesgue measure on `[-1, 1]`.
pub fn sign_flow_scenario(intervals: usize) -> Result<SignFlowReport> {
    let u = sign_field(2.0, intervals)?;
    let h = u.spacing();
    // seeds off the lattice and asymmetric about the origin
    let x0: Vec<f64> = (0..intervals / 2)
        .map(|i| -1.0 + (i as f64 + 0.3) * 4.0 / intervals as f64)
        .collect();
    let flow = filippov_flow(&u, &x0, 0.0, 1.0)?;
    let mut flow_error = 0.0_f64;
    for (k, &t) in flow.times.iter().enumerate() {
        for (i, &x) in x0.iter().enumerate() {
            let exact = if x == 0.0 {
                0.0
            } else {
                x.signum() * (x.abs() - t).max(0.0)
            };
            flow_error = flow_error.max((flow.positions[k][i] - exact).abs());
        }
    }
    let mu0 = Measure1D::lebesgue(intervals, 2.0, -1.0, 1.0);
    let seeds = filippov_flow(&u, &mu0.flow_seeds(), 0.0, 0.5)?;
    let mu = pushforward(&mu0, &seeds, seeds.times.len() - 1)?;
    let atom_mass = mu.atom_mass_near(0.0, h);
    let flow_tol = 2.0 * flow.substep + h;
    Ok(SignFlowReport {
        intervals,
        h,
        substep: flow.substep,
        flow_error,
        flow_tol,
        atom_mass,
        atom_mass_tol: ATOM_MASS_TOL,
        pass: flow_error <= flow_tol && (atom_mass - 1.0).abs() <= ATOM_MASS_TOL,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstancyCheck {
    pub relative: f64,
    pub absolute: f64,
    pub bound: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorpusDualityReport {
    pub seed: u64,
    pub intervals: usize,
    pub k: f64,
    pub fields: Vec<ConstancyCheck>,
    /// Largest `residual / (h + sub-step)`.
    pub worst_ratio: f64,
    pub pass: bool,
}

fn output_times(horizon: f64, samples: usize) -> Vec<f64> {
    (0..samples)
        .map(|k| horizon * k as f64 / (samples - 1) as f64)
        .collect()
}

/// Lebesgue measure on `[-1, 1]` pushed forward by each field of the
/// velocity corpus on `[-2, 2] x [0, 0.5]`, then tested for constancy.
pub fn corpus_duality_scenario(seed: u64, count: usize, intervals: usize) -> Result<CorpusDualityReport> {
    const HORIZON: f64 = 0.5;
    const SAMPLES: usize = 11;
    let fields = velocity_corpus(seed, count, 2.0, intervals, HORIZON, SAMPLES)?;
    let mu0 = Measure1D::lebesgue(intervals, 2.0, -1.0, 1.0);
    let times = output_times(HORIZON, SAMPLES);
    let bank = hat_bank(-1.0, 1.0);
    let mut checks = Vec::with_capacity(fields.len());
    let mut worst_ratio = 0.0_f64;
    for u in &fields {
        let traj = MeasureTrajectory::pushforward(&mu0, u, &times)?;
        let r = duality_residual(&traj, u, &bank, HORIZON)?;
        let scale = u.spacing() + u.substep();
        worst_ratio = worst_ratio.max(r.relative / scale);
        checks.push(ConstancyCheck {
            relative: r.relative,
            absolute: r.absolute,
            bound: DUALITY_K * scale,
            pass: r.relative <= DUALITY_K * scale,
        });
    }
    Ok(CorpusDualityReport {
        seed,
        intervals,
        k: DUALITY_K,
        pass: checks.iter().all(|c| c.pass),
        fields: checks,
        worst_ratio,
    })
}

/// Lebesgue measure on `[-1, 1]` held fixed while `u = -sgn(x)` acts up to
/// `tau = 1`: the constancy check against `K (h + sub-step)` must fail.
pub fn frozen_non_solution(intervals: usize) -> Result<ConstancyCheck> {
    let u = sign_field(2.0, intervals)?;
    let mu0 = Measure1D::lebesgue(intervals, 2.0, -1.0, 1.0);
    let times = output_times(1.0, 11);
    let traj = MeasureTrajectory::new(times.clone(), vec![mu0; times.len()])?;
    let r = duality_residual(&traj, &u, &hat_bank(-1.0, 1.0), 1.0)?;
    let bound = DUALITY_K * (u.spacing() + u.substep());
    Ok(ConstancyCheck {
        relative: r.relative,
        absolute: r.absolute,
        bound,
        pass: r.relative <= bound,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeakDualityReport {
    pub h: f64,
    pub sup_u: f64,
    pub bank_tv: f64,
    pub relative: f64,
    pub absolute: f64,
    pub bound: f64,
    pub pass: bool,
}

/// Density snapshots of a solver run, read as measures, tested for constancy
/// against the run's own velocity with the hat bank of `[-L/2, L/2]`.
pub fn solver_duality(traj: &Trajectory) -> Result<WeakDualityReport> {
    if traj.snapshots.len() < 2 {
        return Err(Error::Input("solver duality needs at least two snapshots".into()));
    }
    let u = VelocityField::from_trajectory(traj)?;
    let times = traj.times();
    let measures = traj
        .snapshots
        .iter()
        .map(|s| Measure1D::from_density(s.rho.clone()))
        .collect();
    let mt = MeasureTrajectory::new(times, measures)?;
    let l = traj.params.half_width;
    let bank = hat_bank(-0.5 * l, 0.5 * l);
    let bank_tv = bank.iter().map(|b| b.total_variation()).fold(0.0, f64::max);
    let r = duality_residual(&mt, &u, &bank, mt.final_time())?;
    let h = traj.params.h();
    let bound = WEAK_DUALITY_FACTOR * h * u.sup_bound() * bank_tv;
    Ok(WeakDualityReport {
        h,
        sup_u: u.sup_bound(),
        bank_tv,
        relative: r.relative,
        absolute: r.absolute,
        bound,
        pass: r.relative <= bound,
    })
}
