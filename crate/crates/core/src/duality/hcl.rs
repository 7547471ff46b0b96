use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::GridField;
use crate::testbank::{hat_bank, space_time_bank, Hat, SpaceTimeBump};

use super::measure::{dual_lipschitz_distance, Measure1D};
use super::reversible::{duality_residual, MeasureTrajectory};
use super::velocity::VelocityField;

/// Tolerances of the four hard-congestion duality conditions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HclTolerances {
    pub mass_weak: f64,
    pub momentum_duality: f64,
    pub complementarity: f64,
    pub momentum_split: f64,
}

impl HclTolerances {
    pub fn uniform(tol: f64) -> Self {
        Self {
            mass_weak: tol,
            momentum_duality: tol,
            complementarity: tol,
            momentum_split: tol,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Condition {
    pub value: f64,
    pub tol: f64,
    pub pass: bool,
}

impl Condition {
    fn new(value: f64, tol: f64) -> Self {
        Self {
            value,
            tol,
            pass: value <= tol,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HclReport {
    /// Weak residual of `rho_t + (rho u)_x = 0` over the space-time bank.
    pub mass_weak: Condition,
    /// Relative duality residual of `m` over the hat bank.
    pub momentum_duality: Condition,
    /// `max_t sum |(1 - rho) pi| h`.
    pub complementarity: Condition,
    /// `max_t` dual Lipschitz distance between `m` and `rho u + pi_x`.
    pub momentum_split: Condition,
    /// Absolute duality residual of `m`, for information.
    pub momentum_duality_absolute: f64,
    pub pass: bool,
}

/// `int int (mu phi_t + v mu phi_x) dx dt`, trapezoid in time over the
/// trajectory, density paired at cell centers and atoms at their locations.
pub fn space_time_pairing(traj: &MeasureTrajectory, v: &VelocityField, phi: &SpaceTimeBump) -> f64 {
    let slice = |k: usize| {
        let t = traj.times[k];
        traj.measures[k].pair(|x| phi.dt(t, x) + v.value(t, x) * phi.dx(t, x))
    };
    let mut total = 0.0;
    let mut prev = slice(0);
    for k in 1..traj.times.len() {
        let next = slice(k);
        total += 0.5 * (traj.times[k] - traj.times[k - 1]) * (prev + next);
        prev = next;
    }
    total
}

/// Largest positive part of `-int int (mu phi_t + v mu phi_x)` over the bank:
/// zero when `mu_t + (v mu)_x <= 0` holds weakly against nonnegative tests.
pub fn transport_inequality_defect(traj: &MeasureTrajectory, v: &VelocityField, bank: &[SpaceTimeBump]) -> f64 {
    bank.iter()
        .map(|phi| -space_time_pairing(traj, v, phi))
        .fold(0.0, f64::max)
}

/// Largest `|int int (mu phi_t + v mu phi_x)|` over the bank.
pub fn transport_weak_residual(traj: &MeasureTrajectory, v: &VelocityField, bank: &[SpaceTimeBump]) -> f64 {
    bank.iter()
        .map(|phi| space_time_pairing(traj, v, phi).abs())
        .fold(0.0, f64::max)
}

/// `<pi_x, hat>` for the piecewise-constant `pi`: face jumps times hat values.
fn pair_derivative(pi: &GridField, hat: &Hat) -> f64 {
    (1..pi.len())
        .map(|i| (pi.values[i] - pi.values[i - 1]) * hat.value(pi.face(i)))
        .sum()
}

/// `<rho u, hat>` with `u` frozen at cell centers and atoms.
fn pair_flux(rho: &Measure1D, u: &VelocityField, t: f64, hat: &Hat) -> f64 {
    let ac: f64 = (0..rho.cells())
        .map(|i| rho.ac.values[i] * u.value(t, rho.ac.center(i)) * hat.integral(rho.ac.face(i), rho.ac.face(i + 1)))
        .sum();
    ac + rho
        .atoms
        .iter()
        .map(|&(x, m)| m * u.value(t, x) * hat.value(x))
        .sum::<f64>()
}

/// Checks a candidate hard-congestion triple `(rho, m, pi)` with velocity
/// `u`. Banks live on the middle half `[-L/2, L/2]` of the density grid; the
/// momentum split is checked at every time of the trajectory.
pub fn hcl_duality_check(
    rho: &MeasureTrajectory,
    m: &MeasureTrajectory,
    pi: &[GridField],
    u: &VelocityField,
    tol: &HclTolerances,
) -> Result<HclReport> {
    if rho.times != m.times || pi.len() != rho.times.len() {
        return Err(Error::Input("rho, m and pi must share one time grid".into()));
    }
    let first = &rho.measures[0].ac;
    for (k, field) in pi.iter().enumerate() {
        first.same_grid(field)?;
        first.same_grid(&rho.measures[k].ac)?;
        first.same_grid(&m.measures[k].ac)?;
    }
    let l = first.half_width();
    let horizon = rho.final_time();
    let st_bank = space_time_bank(-0.5 * l, 0.5 * l, horizon);
    let hats = hat_bank(-0.5 * l, 0.5 * l);

    let weak = transport_weak_residual(rho, u, &st_bank);
    let duality = duality_residual(m, u, &hats, horizon)?;
    let complementarity = rho
        .measures
        .iter()
        .zip(pi)
        .map(|(r, p)| {
            r.ac.values
                .iter()
                .zip(&p.values)
                .map(|(r, p)| ((1.0 - r) * p).abs())
                .sum::<f64>()
                * p.h
        })
        .fold(0.0, f64::max);
    let mut split = 0.0_f64;
    for (k, &t) in rho.times.iter().enumerate() {
        for hat in &hats {
            let d = m.measures[k].pair_hat(hat) - pair_flux(&rho.measures[k], u, t, hat) - pair_derivative(&pi[k], hat);
            split = split.max(d.abs());
        }
    }

    let mass_weak = Condition::new(weak, tol.mass_weak);
    let momentum_duality = Condition::new(duality.relative, tol.momentum_duality);
    let complementarity = Condition::new(complementarity, tol.complementarity);
    let momentum_split = Condition::new(split, tol.momentum_split);
    Ok(HclReport {
        pass: mass_weak.pass && momentum_duality.pass && complementarity.pass && momentum_split.pass,
        mass_weak,
        momentum_duality,
        complementarity,
        momentum_split,
        momentum_duality_absolute: duality.absolute,
    })
}

/// Dual Lipschitz distances at time `t` between the pushforward of Lebesgue
/// on `[-1, 1]` under `-clamp(x / delta, -1, 1)` and under `-sgn(x)`, one per
/// `delta`, measured on the hat bank over `[-1, 1]`.
pub fn mollified_sign_distances(deltas: &[f64], cells: usize, half_width: f64, t: f64) -> Result<Vec<f64>> {
    if half_width <= 1.0 + t {
        return Err(Error::Input(format!("half-width {half_width} too small for t = {t}")));
    }
    let xs = VelocityField::lattice(half_width, cells);
    let mu0 = Measure1D::lebesgue(cells, half_width, -1.0, 1.0);
    let times = [0.0, t];
    let sign = VelocityField::steady(xs.clone(), 0.0, |x| if x == 0.0 { 0.0 } else { -x.signum() })?;
    let limit = MeasureTrajectory::pushforward(&mu0, &sign, &times)?;
    let bank = hat_bank(-1.0, 1.0);
    deltas
        .iter()
        .map(|&delta| {
            if !(delta > 0.0) {
                return Err(Error::Input(format!(
                    "mollification scale must be positive, got {delta}"
                )));
            }
            let u = VelocityField::steady(xs.clone(), 0.0, |x| -(x / delta).clamp(-1.0, 1.0))?;
            let traj = MeasureTrajectory::pushforward(&mu0, &u, &times)?;
            dual_lipschitz_distance(&traj.measures[1], &limit.measures[1], &bank)
        })
        .collect()
}
