use serde::{Deserialize, Serialize};

use crate::constitutive::{self, power};
use crate::error::{Error, Result};
use crate::grid::GridField;
use crate::params::Params;

use super::state::FluidState;

/// Families of smooth initial data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialKind {
    /// `rho = rho_bar`, `u = 0`.
    Equilibrium,
    /// Gaussian density bump rising into the congested range.
    ///
    /// The peak is `rho_max = ((1 + C) e^(-margin))^(1/(gamma+1))`, so
    /// `rho_max^(gamma+1) = (1 + C) e^(-margin)` is independent of `gamma`
    /// and the same datum can be swept across stiffnesses.
    CongestedBump {
        #[serde(default = "default_sigma")]
        sigma: f64,
        #[serde(default = "default_margin")]
        margin: f64,
        /// Amplitude of the optional compressive velocity `-u_max tanh(x/sigma_u)`.
        #[serde(default)]
        u_max: f64,
        #[serde(default = "default_sigma_u")]
        sigma_u: f64,
    },
    /// `rho = rho_bar`, `u = -u_max tanh(x/sigma)`.
    OpposingStreams {
        #[serde(default = "default_u_max")]
        u_max: f64,
        #[serde(default = "default_sigma")]
        sigma: f64,
    },
    /// Fully congested datum with `pi = e^(x^2)` on `|x| <= a`, relaxed to the
    /// background outside with Gaussian tails of width `sigma`; `u = 0`.
    CounterexampleTrunc {
        #[serde(default = "default_plateau")]
        a: f64,
        #[serde(default = "default_edge")]
        sigma: f64,
    },
}

fn default_sigma() -> f64 {
    0.5
}
fn default_margin() -> f64 {
    1.0
}
fn default_sigma_u() -> f64 {
    1.0
}
fn default_u_max() -> f64 {
    0.5
}
fn default_plateau() -> f64 {
    1.0
}
fn default_edge() -> f64 {
    0.25
}

/// Builds the datum on the grid of `params` and checks it against the
/// admissibility bounds.
pub fn make_initial(kind: &InitialKind, params: &Params) -> Result<FluidState> {
    params.validate()?;
    let n = params.cells;
    let l = params.half_width;
    let g = params.gamma;
    let rb = params.rho_bar;
    let state = match *kind {
        InitialKind::Equilibrium => FluidState::new(
            0.0,
            GridField::constant(n, params.h(), rb),
            GridField::constant(n, params.h(), 0.0),
            [0.0, 0.0],
        )?,
        InitialKind::CongestedBump {
            sigma,
            margin,
            u_max,
            sigma_u,
        } => {
            positive("sigma", sigma)?;
            positive("sigma_u", sigma_u)?;
            let peak = (((1.0 + params.c_mom).ln() - margin) / (g + 1.0)).exp();
            let rho = GridField::from_fn(n, l, |x| rb + (peak - rb) * (-(x * x) / (sigma * sigma)).exp());
            let u = GridField::from_fn(n, l, |x| -u_max * (x / sigma_u).tanh());
            let far = -u_max * (l / sigma_u).tanh();
            FluidState::new(0.0, rho, u, [-far, far])?
        }
        InitialKind::OpposingStreams { u_max, sigma } => {
            positive("sigma", sigma)?;
            let rho = GridField::constant(n, params.h(), rb);
            let u = GridField::from_fn(n, l, |x| -u_max * (x / sigma).tanh());
            let far = -u_max * (l / sigma).tanh();
            FluidState::new(0.0, rho, u, [-far, far])?
        }
        InitialKind::CounterexampleTrunc { a, sigma } => {
            positive("a", a)?;
            positive("sigma", sigma)?;
            let pi_bar = constitutive::potential_at(rb, g);
            let scale = (g + 1.0) / g;
            let rho = GridField::from_fn(n, l, |x| {
                let excess = (x.abs() - a).max(0.0);
                let cut = (-(excess * excess) / (sigma * sigma)).exp();
                let pi = pi_bar + ((x.min(a).max(-a)).powi(2).exp() - pi_bar) * cut;
                power(scale * pi, 1.0 / (g + 1.0))
            });
            FluidState::new(0.0, rho, GridField::constant(n, params.h(), 0.0), [0.0, 0.0])?
        }
    };
    let report = validate_initial(&state, params)?;
    if let Some(failed) = report.checks.iter().find(|c| c.applicable && !c.pass) {
        return Err(Error::Admissibility {
            bound: failed.name,
            detail: format!("measured {} against bound {}", failed.measured, failed.bound),
        });
    }
    Ok(state)
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParams(format!("{name} must be positive, got {v}")))
    }
}

/// One admissibility condition with its measured value.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundCheck {
    pub name: &'static str,
    pub measured: f64,
    pub bound: f64,
    pub pass: bool,
    /// False when the condition is not meaningful for the datum, e.g. the
    /// momentum L1 bound for data with nonzero far-field velocity.
    pub applicable: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdmissibilityReport {
    /// Measured `min rho0`.
    pub r0: f64,
    /// `max(sup D_c w0 / rho0, 0)`, or the configured value.
    pub m0: f64,
    /// Measured `sup lambda(rho0) D_c u0`.
    pub sup_v0: f64,
    pub checks: Vec<BoundCheck>,
}

impl AdmissibilityReport {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass || !c.applicable)
    }

    /// Lower density bound `1 / (M0 t + 1/r0)`.
    pub fn density_floor(&self, t: f64) -> f64 {
        1.0 / (self.m0 * t + 1.0 / self.r0)
    }

    /// Bound on `D_c u` obtained from `sup V0` and the density floor at `T`.
    pub fn oslc_constant(&self, gamma: f64, horizon: f64) -> f64 {
        let base = self.m0 * horizon + 1.0 / self.r0;
        self.sup_v0.max(0.0) * ((gamma + 1.0) * base.ln()).exp() / gamma
    }
}

/// Measures the admissibility conditions of a datum; never fails on a
/// violated bound, only on malformed input.
pub fn validate_initial(state: &FluidState, params: &Params) -> Result<AdmissibilityReport> {
    let g = params.gamma;
    let c = params.c_mom;
    let rho = &state.rho;
    let r0 = rho.min();
    let w = state.desired_velocity(g)?;
    let measured_m0 = constitutive::transported_potential(rho, &w)?.max().max(0.0);
    let m0 = params.m0.unwrap_or(measured_m0);
    let sup_v0 = state.active_potential(g)?.max();
    let rel = 1.0 + 1e-12;

    let rho_max = rho.max();
    let cap = params.density_cap();
    let density_ok = r0 >= params.r0 / rel && rho_max <= cap * rel;

    let h = rho.h;
    let mom: f64 = rho
        .values
        .iter()
        .zip(&state.u.values)
        .zip(&w.values)
        .map(|((r, u), w)| (r * u).abs() * h + (r * w).abs() * h)
        .sum();
    let far_field_at_rest = state.far_u == [0.0, 0.0];

    let base = m0 * params.horizon + 1.0 / r0;
    let slope_bound = g / ((g + 1.0) * base.ln()).exp();

    let u_sup = state.u.sup_norm();
    let checks = vec![
        BoundCheck {
            name: "density_bounds",
            measured: rho_max,
            bound: cap,
            pass: density_ok,
            applicable: true,
        },
        BoundCheck {
            name: "momentum_l1",
            measured: mom,
            bound: c,
            pass: mom <= c * rel,
            applicable: far_field_at_rest,
        },
        BoundCheck {
            name: "viscous_slope",
            measured: sup_v0,
            bound: slope_bound,
            pass: sup_v0 <= slope_bound * rel,
            applicable: true,
        },
        BoundCheck {
            name: "velocity_sup",
            measured: u_sup,
            bound: c,
            pass: u_sup <= c * rel,
            applicable: true,
        },
    ];
    Ok(AdmissibilityReport { r0, m0, sup_v0, checks })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(gamma: f64, c: f64) -> Params {
        Params {
            gamma,
            c_mom: c,
            cells: 400,
            ..Params::default()
        }
    }

    #[test]
    fn equilibrium_passes_with_zero_m0() {
        let p = params(10.0, 1.0);
        let s = make_initial(&InitialKind::Equilibrium, &p).unwrap();
        assert!(s.rho.values.iter().all(|&r| r == 0.8));
        assert!(s.u.values.iter().all(|&u| u == 0.0));
        let rep = validate_initial(&s, &p).unwrap();
        assert!(rep.pass());
        assert_eq!(rep.m0, 0.0);
    }

    #[test]
    fn bump_respects_density_cap() {
        let p = params(40.0, 1.0);
        let kind = InitialKind::CongestedBump {
            sigma: 0.5,
            margin: 2.0,
            u_max: 0.0,
            sigma_u: 1.0,
        };
        let s = make_initial(&kind, &p).unwrap();
        let cap = (std::f64::consts::LN_2 / 41.0).exp();
        assert!(s.rho.max() <= cap);
        assert!((cap - 1.0170).abs() < 1e-4);
    }

    #[test]
    fn congested_bump_needs_room_in_the_momentum_bound() {
        // a peak above 1 carries TV(pi) close to 2 and cannot satisfy C = 1
        let p = params(40.0, 1.0);
        let kind = InitialKind::CongestedBump {
            sigma: 0.5,
            margin: 0.1,
            u_max: 0.0,
            sigma_u: 1.0,
        };
        assert!(matches!(
            make_initial(&kind, &p),
            Err(Error::Admissibility {
                bound: "momentum_l1",
                ..
            })
        ));
        let roomy = params(40.0, 4.0);
        let s = make_initial(
            &InitialKind::CongestedBump {
                sigma: 0.5,
                margin: 1.0,
                u_max: 0.0,
                sigma_u: 1.0,
            },
            &roomy,
        )
        .unwrap();
        assert!(s.rho.max() > 1.0);
    }

    #[test]
    fn opposing_streams_velocity_sup() {
        let p = params(10.0, 1.0);
        let s = make_initial(&InitialKind::OpposingStreams { u_max: 0.5, sigma: 0.5 }, &p).unwrap();
        assert!((s.u.sup_norm() - 0.5).abs() < 1e-8);
        assert!(s.u.sup_norm() <= p.c_mom);
        assert!(s.far_u[0] > 0.0 && s.far_u[1] < 0.0);
    }

    #[test]
    fn velocity_above_c_is_rejected() {
        let p = params(10.0, 1.0);
        let s = make_initial(&InitialKind::Equilibrium, &p).unwrap();
        let mut bad = s.clone();
        bad.u = GridField::from_fn(p.cells, p.half_width, |x| 2.0 * (-x * x).exp());
        let rep = validate_initial(&bad, &p).unwrap();
        let v = rep.checks.iter().find(|c| c.name == "velocity_sup").unwrap();
        assert!(!v.pass);
        assert!(!rep.pass());
        assert!(matches!(
            make_initial(&InitialKind::OpposingStreams { u_max: 2.0, sigma: 0.5 }, &p),
            Err(Error::Admissibility {
                bound: "velocity_sup",
                ..
            })
        ));
    }

    #[test]
    fn slope_bound_matches_direct_evaluation() {
        let p = Params {
            gamma: 40.0,
            c_mom: 4.0,
            horizon: 0.5,
            cells: 800,
            ..Params::default()
        };
        let s = make_initial(
            &InitialKind::CongestedBump {
                sigma: 0.5,
                margin: 1.0,
                u_max: 0.0,
                sigma_u: 1.0,
            },
            &p,
        )
        .unwrap();
        let rep = validate_initial(&s, &p).unwrap();
        let check = rep.checks.iter().find(|c| c.name == "viscous_slope").unwrap();
        let direct = 40.0 / (rep.m0 * 0.5 + 1.0 / rep.r0).powf(41.0);
        assert!((check.bound - direct).abs() <= 1e-12 * direct);
        assert!(rep.m0 > 0.0);
    }

    #[test]
    fn truncated_counterexample_is_congested_on_the_plateau() {
        let p = Params {
            gamma: 20.0,
            c_mom: 10.0,
            ..Params::default()
        };
        let s = make_initial(&InitialKind::CounterexampleTrunc { a: 1.0, sigma: 0.25 }, &p).unwrap();
        let pi = s.potential(20.0).unwrap();
        let mid = p.cells / 2;
        assert!((pi.values[mid] - (pi.center(mid).powi(2)).exp()).abs() < 1e-12);
        assert!((s.rho.values[0] - 0.8).abs() < 1e-10);
    }
}
