//! One time step of the approximate system in its two formulations.
//!
//! Both steps are split: a conservative first-order upwind update of the
//! transported quantities followed by a linearly implicit diffusion solve. The
//! viscosity of the velocity step is frozen at the transported density (the
//! density of the new time level, already known when `u` is solved for); the
//! density diffusivity of the `(rho, w)` step is frozen at the old density.
//! Interface velocities are the arithmetic mean of the neighbouring cells;
//! ghost cells carry `rho_bar` and the far-field velocity.
//!
//! With `dt <= h / (2 max|u|)` every cell update of the upwind stage is a
//! convex combination of its neighbours, which gives positivity of the
//! density and a discrete maximum principle for `u`. The implicit stage is an
//! M-matrix solve and preserves both.

use crate::constitutive::{density_diffusivity_at, viscosity_at};
use crate::error::{Error, Result};
use crate::grid::GridField;
use crate::params::Params;
use crate::tridiag;

use super::state::{FluidState, RwState};

/// Floor used in the CFL denominator so that a fluid at rest has a finite step.
pub const SPEED_FLOOR: f64 = 1e-8;

/// Boundary bookkeeping of one velocity-form step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepReport {
    pub state: FluidState,
    /// Net mass entering through the two boundary faces, `dt (F_left - F_right)`.
    pub mass_influx: f64,
    /// Net kinetic energy `rho u^2` entering through the boundary faces.
    pub energy_influx: f64,
}

/// Largest admissible step `cfl h / max(|u|, SPEED_FLOOR)`.
pub fn cfl_limit(state: &FluidState, params: &Params) -> f64 {
    params.cfl * state.h() / state.max_speed().max(SPEED_FLOOR)
}

fn check_cfl(dt: f64, limit: f64) -> Result<()> {
    if !(dt > 0.0) || dt > limit * (1.0 + 1e-12) {
        return Err(Error::StepSize { dt, limit });
    }
    Ok(())
}

/// Interface values `(a_{f-1} + a_f)/2` for the `N+1` faces, ghosts included.
fn face_average(v: &[f64], left: f64, right: f64) -> Vec<f64> {
    let n = v.len();
    (0..=n)
        .map(|f| {
            let l = if f == 0 { left } else { v[f - 1] };
            let r = if f == n { right } else { v[f] };
            0.5 * (l + r)
        })
        .collect()
}

/// Donor-cell flux `a^+ q_{f-1} + a^- q_f` at every face.
fn upwind_flux(speed: &[f64], q: &[f64], q_left: f64, q_right: f64) -> Vec<f64> {
    let n = q.len();
    speed
        .iter()
        .enumerate()
        .map(|(f, &a)| {
            let l = if f == 0 { q_left } else { q[f - 1] };
            let r = if f == n { q_right } else { q[f] };
            a.max(0.0) * l + a.min(0.0) * r
        })
        .collect()
}

fn apply_divergence(q: &[f64], flux: &[f64], nu: f64) -> Vec<f64> {
    q.iter()
        .enumerate()
        .map(|(i, &v)| v - nu * (flux[i + 1] - flux[i]))
        .collect()
}

/// Solves `mass_i x_i - r [k_{i+1}(x_{i+1} - x_i) - k_i (x_i - x_{i-1})] = mass_i b_i`
/// with Dirichlet ghosts, `r = dt / h^2` and face coefficients `k` (length N+1).
fn implicit_diffusion(mass: &[f64], b: &[f64], k: &[f64], ghosts: [f64; 2], r: f64) -> Result<Vec<f64>> {
    let n = mass.len();
    let mut lower = vec![0.0; n];
    let mut diag = vec![0.0; n];
    let mut upper = vec![0.0; n];
    let mut rhs = vec![0.0; n];
    for i in 0..n {
        lower[i] = -r * k[i];
        upper[i] = -r * k[i + 1];
        diag[i] = mass[i] + r * (k[i] + k[i + 1]);
        rhs[i] = mass[i] * b[i];
    }
    rhs[0] += r * k[0] * ghosts[0];
    rhs[n - 1] += r * k[n] * ghosts[1];
    if let Some(row) = tridiag::dominance_violation(&lower, &diag, &upper) {
        return Err(Error::Solver(format!(
            "implicit diffusion lost diagonal dominance at row {row}"
        )));
    }
    tridiag::solve(&lower, &diag, &upper, &mut rhs)?;
    Ok(rhs)
}

fn face_coefficients(rho: &[f64], rho_bar: f64, law: impl Fn(f64) -> f64) -> Vec<f64> {
    let cell: Vec<f64> = rho.iter().map(|&r| law(r)).collect();
    let ghost = law(rho_bar);
    face_average(&cell, ghost, ghost)
}

/// One step of the velocity formulation, returning boundary bookkeeping.
pub fn step_velocity_detailed(state: &FluidState, params: &Params, dt: f64) -> Result<StepReport> {
    check_cfl(dt, cfl_limit(state, params))?;
    let h = state.h();
    let nu = dt / h;
    let rho = &state.rho.values;
    let u = &state.u.values;
    let [ul, ur] = state.far_u;
    let rho_bar = params.rho_bar;

    let speed = face_average(u, ul, ur);
    let mass_flux = upwind_flux(&speed, rho, rho_bar, rho_bar);
    let q: Vec<f64> = rho.iter().zip(u).map(|(r, v)| r * v).collect();
    let mom_flux = upwind_flux(&speed, &q, rho_bar * ul, rho_bar * ur);

    let rho_new = apply_divergence(rho, &mass_flux, nu);
    if let Some(cell) = rho_new.iter().position(|&r| !(r > 0.0)) {
        return Err(Error::Domain {
            field: "density after transport",
            cell,
            value: rho_new[cell],
        });
    }
    let q_star = apply_divergence(&q, &mom_flux, nu);
    let u_star: Vec<f64> = q_star.iter().zip(&rho_new).map(|(q, r)| q / r).collect();

    let lambda = face_coefficients(&rho_new, rho_bar, |r| viscosity_at(r, params.gamma));
    let u_new = implicit_diffusion(&rho_new, &u_star, &lambda, [ul, ur], dt / (h * h))?;

    let n = rho.len();
    let state = FluidState {
        t: state.t + dt,
        rho: GridField { values: rho_new, h },
        u: GridField { values: u_new, h },
        far_u: state.far_u,
    };
    Ok(StepReport {
        state,
        mass_influx: dt * (mass_flux[0] - mass_flux[n]),
        energy_influx: dt * (mom_flux[0] * ul - mom_flux[n] * ur),
    })
}

/// One step of the velocity formulation: upwind continuity, upwind momentum
/// advection, then implicit `d_x(lambda d_x u)` with `lambda = lambda(rho^{n+1})`.
pub fn step_velocity_form(state: &FluidState, params: &Params, dt: f64) -> Result<FluidState> {
    step_velocity_detailed(state, params, dt).map(|r| r.state)
}

/// Largest admissible step of the `(rho, w)` formulation, whose density flux
/// is advected with `w`.
pub fn cfl_limit_rw(state: &RwState, params: &Params) -> Result<f64> {
    let u = state.velocity(params.gamma)?;
    let speed = u
        .sup_norm()
        .max(state.w.sup_norm())
        .max(state.far_u[0].abs())
        .max(state.far_u[1].abs());
    Ok(params.cfl * state.rho.h / speed.max(SPEED_FLOOR))
}

/// Boundary bookkeeping of one `(rho, w)` step.
#[derive(Debug, Clone, PartialEq)]
pub struct RwStepReport {
    pub state: RwState,
    /// Net mass entering through the boundary faces, advective and diffusive.
    pub mass_influx: f64,
    /// Net `rho w u` flux times the far-field velocity, the analogue of the
    /// kinetic-energy influx of the velocity step.
    pub energy_influx: f64,
}

/// One step of the `(rho, w)` formulation. The density moves by the upwind
/// flux `rho w` plus implicit diffusion `d_x(rho p'(rho) d_x rho)` with the
/// coefficient frozen at the old density; `rho w` is then carried by the same
/// total face mass flux, upwinded on its sign, so that `w` at the new time is
/// a convex combination of old neighbouring values.
pub fn step_rw_detailed(state: &RwState, params: &Params, dt: f64) -> Result<RwStepReport> {
    check_cfl(dt, cfl_limit_rw(state, params)?)?;
    let h = state.rho.h;
    let nu = dt / h;
    let r = dt / (h * h);
    let gamma = params.gamma;
    let rho_bar = params.rho_bar;
    let [ul, ur] = state.far_u;
    let rho = &state.rho.values;
    let w = &state.w.values;
    let n = rho.len();

    let w_speed = face_average(w, ul, ur);
    let advective = upwind_flux(&w_speed, rho, rho_bar, rho_bar);
    let rho_star = apply_divergence(rho, &advective, nu);
    let kappa = face_coefficients(rho, rho_bar, |r| density_diffusivity_at(r, gamma));
    let ones = vec![1.0; n];
    let rho_new = implicit_diffusion(&ones, &rho_star, &kappa, [rho_bar, rho_bar], r)?;
    if let Some(cell) = rho_new.iter().position(|&r| !(r > 0.0)) {
        return Err(Error::Domain {
            field: "density",
            cell,
            value: rho_new[cell],
        });
    }
    let mass_flux: Vec<f64> = (0..=n)
        .map(|f| {
            let l = if f == 0 { rho_bar } else { rho_new[f - 1] };
            let rr = if f == n { rho_bar } else { rho_new[f] };
            advective[f] - kappa[f] * (rr - l) / h
        })
        .collect();
    // outflow may not exceed the cell content, else w_new leaves the hull
    for i in 0..n {
        let out = mass_flux[i + 1].max(0.0) - mass_flux[i].min(0.0);
        if nu * out > rho[i] * (1.0 + 1e-12) {
            return Err(Error::StepSize {
                dt,
                limit: dt * rho[i] / (nu * out),
            });
        }
    }
    let rw_flux: Vec<f64> = mass_flux
        .iter()
        .enumerate()
        .map(|(f, &m)| {
            let wl = if f == 0 { ul } else { w[f - 1] };
            let wr = if f == n { ur } else { w[f] };
            m.max(0.0) * wl + m.min(0.0) * wr
        })
        .collect();
    let rw: Vec<f64> = rho.iter().zip(w).map(|(r, w)| r * w).collect();
    let rw_new = apply_divergence(&rw, &rw_flux, nu);
    let w_new: Vec<f64> = rw_new.iter().zip(&rho_new).map(|(m, r)| m / r).collect();

    Ok(RwStepReport {
        state: RwState {
            t: state.t + dt,
            rho: GridField { values: rho_new, h },
            w: GridField { values: w_new, h },
            far_u: state.far_u,
        },
        mass_influx: dt * (mass_flux[0] - mass_flux[n]),
        energy_influx: dt * (rw_flux[0] * ul - rw_flux[n] * ur),
    })
}

pub fn step_rw_form(state: &RwState, params: &Params, dt: f64) -> Result<RwState> {
    step_rw_detailed(state, params, dt).map(|r| r.state)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(gamma: f64, n: usize, half_width: f64) -> Params {
        Params {
            gamma,
            rho_bar: 0.8,
            half_width,
            cells: n,
            cfl: 0.45,
            horizon: 1.0,
            c_mom: 1.0,
            r0: 0.5,
            m0: None,
        }
    }

    #[test]
    fn equilibrium_is_a_fixed_point() {
        let p = params(10.0, 32, 2.0);
        let s = FluidState::new(
            0.0,
            GridField::constant(32, p.h(), 0.8),
            GridField::constant(32, p.h(), 0.0),
            [0.0, 0.0],
        )
        .unwrap();
        let next = step_velocity_form(&s, &p, 0.01).unwrap();
        assert_eq!(next.rho.values, s.rho.values);
        assert_eq!(next.u.values, s.u.values);
        let rw = step_rw_form(&s.to_rw(10.0).unwrap(), &p, 0.01).unwrap();
        assert!(rw.rho.values.iter().all(|&r| (r - 0.8).abs() < 1e-15));
        assert!(rw.w.values.iter().all(|&w| w.abs() < 1e-15));
    }

    #[test]
    fn uniform_translation_is_preserved() {
        let p = params(5.0, 32, 2.0);
        let c = 0.35;
        let s = FluidState::new(
            0.0,
            GridField::constant(32, p.h(), 0.8),
            GridField::constant(32, p.h(), c),
            [c, c],
        )
        .unwrap();
        let dt = 0.9 * cfl_limit(&s, &p);
        let next = step_velocity_form(&s, &p, dt).unwrap();
        for (r, u) in next.rho.values.iter().zip(&next.u.values) {
            assert!((r - 0.8).abs() < 1e-15);
            assert!((u - c).abs() < 1e-14);
        }
        let rw = step_rw_form(&s.to_rw(5.0).unwrap(), &p, dt).unwrap();
        let back = rw.to_velocity_form(5.0).unwrap();
        for (r, u) in back.rho.values.iter().zip(&back.u.values) {
            assert!((r - 0.8).abs() < 1e-15);
            assert!((u - c).abs() < 1e-14);
        }
    }

    #[test]
    fn five_cell_bump_at_rest_is_unchanged() {
        // h = 1, dt = 0.1, gamma = 1: zero velocity gives zero flux and the
        // diffusion of a zero field is zero.
        let mut p = params(1.0, 8, 2.5);
        p.rho_bar = 1.0;
        p.r0 = 1.0;
        let rho = GridField::new(vec![1.0, 1.0, 2.0, 1.0, 1.0], 1.0).unwrap();
        let u = GridField::constant(5, 1.0, 0.0);
        let s = FluidState::new(0.0, rho.clone(), u, [0.0, 0.0]).unwrap();
        let next = step_velocity_form(&s, &p, 0.1).unwrap();
        assert_eq!(next.rho.values, rho.values);
        assert!(next.u.values.iter().all(|&v| v == 0.0));
        assert!((next.t - 0.1).abs() < 1e-15);
    }

    #[test]
    fn rejects_steps_above_cfl() {
        let p = params(5.0, 16, 1.0);
        let s = FluidState::new(
            0.0,
            GridField::constant(16, p.h(), 0.8),
            GridField::constant(16, p.h(), 1.0),
            [1.0, 1.0],
        )
        .unwrap();
        let limit = cfl_limit(&s, &p);
        assert!(matches!(
            step_velocity_form(&s, &p, 2.0 * limit),
            Err(Error::StepSize { .. })
        ));
    }

    #[test]
    fn mass_changes_only_through_boundary_flux() {
        let p = params(8.0, 64, 2.0);
        let rho = GridField::from_fn(64, 2.0, |x| 0.8 + 0.15 * (-4.0 * x * x).exp());
        let u = GridField::from_fn(64, 2.0, |x| -0.4 * (x / 0.5).tanh());
        let s = FluidState::with_extrapolated_far_field(0.0, rho, u).unwrap();
        let dt = cfl_limit(&s, &p);
        let report = step_velocity_detailed(&s, &p, dt).unwrap();
        let before = s.rho.integral();
        let after = report.state.rho.integral();
        assert!((after - before - report.mass_influx * 1.0).abs() < 1e-13);
        assert!(report.mass_influx > 0.0);
    }

    #[test]
    fn velocity_stays_within_initial_range() {
        let p = params(20.0, 128, 2.0);
        let rho = GridField::from_fn(128, 2.0, |x| 0.8 + 0.2 * (-9.0 * x * x).exp());
        let u = GridField::from_fn(128, 2.0, |x| 0.5 * (3.0 * x).sin() * (-x * x).exp());
        let mut s = FluidState::new(0.0, rho, u, [0.0, 0.0]).unwrap();
        let (lo, hi) = (s.u.min().min(0.0), s.u.max().max(0.0));
        for _ in 0..50 {
            let dt = cfl_limit(&s, &p);
            s = step_velocity_form(&s, &p, dt).unwrap();
            assert!(s.u.min() >= lo - 1e-12 && s.u.max() <= hi + 1e-12);
            assert!(s.rho.min() > 0.0);
        }
    }
}
