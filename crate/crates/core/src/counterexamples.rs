//! Fully congested solution families with constant-in-space velocity.
//!
//! With `rho = 1` the velocity is a function of time only, `u = c(t)`, and
//! the momentum is transported: `m(t, x) = f'(X)` with `X = x - int_0^t c`.
//! The pressure follows from `m = u + pi_x` as `pi = f(X) - c(t) x`. Taking
//! `c = 0` instead gives the static solution `(1, f', f; 0)` with the same
//! initial data, so any nonzero admissible `c` exhibits nonuniqueness.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::duality::{hcl_duality_check, HclReport, HclTolerances, Measure1D, MeasureTrajectory, VelocityField};
use crate::error::{Error, Result};
use crate::grid::GridField;
use crate::quadrature::{adaptive_simpson, GaussLegendre};
use crate::testbank::{hat_bank, space_time_bank, Hat, SpaceTimeBump};

/// Nodes per axis of the positivity sampling (`SAMPLES^2 = 10^4` in all).
const SAMPLES: usize = 100;

/// Absolute tolerance of the adaptive integral of `c`.
const PRIMITIVE_TOL: f64 = 1e-14;

type Field = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// Space-time rectangle `[0, horizon] x [a, b]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Window {
    pub horizon: f64,
    pub a: f64,
    pub b: f64,
}

impl Window {
    pub fn new(horizon: f64, a: f64, b: f64) -> Result<Self> {
        if !(horizon > 0.0 && a < b && horizon.is_finite() && a.is_finite() && b.is_finite()) {
            return Err(Error::Input(format!("invalid window [0, {horizon}] x [{a}, {b}]")));
        }
        Ok(Self { horizon, a, b })
    }

    fn nodes(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        let n = SAMPLES - 1;
        (0..SAMPLES).flat_map(move |k| {
            let t = self.horizon * k as f64 / n as f64;
            (0..SAMPLES).map(move |i| (t, self.a + (self.b - self.a) * i as f64 / n as f64))
        })
    }
}

/// Closed-form `(rho, m, pi, u)`.
#[derive(Clone)]
pub struct AnalyticSolution {
    pub label: String,
    rho: Field,
    m: Field,
    pi: Field,
    u: Field,
}

impl fmt::Debug for AnalyticSolution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AnalyticSolution")
            .field("label", &self.label)
            .finish_non_exhaustive()
    }
}

impl AnalyticSolution {
    pub fn rho(&self, t: f64, x: f64) -> f64 {
        (self.rho)(t, x)
    }

    pub fn m(&self, t: f64, x: f64) -> f64 {
        (self.m)(t, x)
    }

    pub fn pi(&self, t: f64, x: f64) -> f64 {
        (self.pi)(t, x)
    }

    pub fn u(&self, t: f64, x: f64) -> f64 {
        (self.u)(t, x)
    }

    /// Smallest `pi` over the `10^4` sampling nodes of the window.
    pub fn min_pi(&self, window: &Window) -> f64 {
        window.nodes().map(|(t, x)| self.pi(t, x)).fold(f64::INFINITY, f64::min)
    }
}

/// Transported member `(1, f'(X), f(X) - c x; c)`, `X = x - shift(t)`.
fn transported<F, D, C, S>(label: String, f: F, df: D, c: C, shift: S) -> AnalyticSolution
where
    F: Fn(f64) -> f64 + Send + Sync + 'static,
    D: Fn(f64) -> f64 + Send + Sync + 'static,
    C: Fn(f64) -> f64 + Send + Sync + Clone + 'static,
    S: Fn(f64) -> f64 + Send + Sync + Clone + 'static,
{
    let (c1, c2) = (c.clone(), c);
    let (s1, s2) = (shift.clone(), shift);
    AnalyticSolution {
        label,
        rho: Arc::new(|_, _| 1.0),
        m: Arc::new(move |t, x| df(x - s1(t))),
        pi: Arc::new(move |t, x| f(x - s2(t)) - c1(t) * x),
        u: Arc::new(move |t, _| c2(t)),
    }
}

fn static_member<F, D>(label: String, f: F, df: D) -> AnalyticSolution
where
    F: Fn(f64) -> f64 + Send + Sync + 'static,
    D: Fn(f64) -> f64 + Send + Sync + 'static,
{
    AnalyticSolution {
        label,
        rho: Arc::new(|_, _| 1.0),
        m: Arc::new(move |_, x| df(x)),
        pi: Arc::new(move |_, x| f(x)),
        u: Arc::new(|_, _| 0.0),
    }
}

fn check_positive(pair: &(AnalyticSolution, AnalyticSolution), window: &Window) -> Result<()> {
    for s in [&pair.0, &pair.1] {
        let min = s.min_pi(window);
        if !(min >= 0.0) {
            return Err(Error::Admissibility {
                bound: "pi_nonnegative",
                detail: format!("{}: min pi = {min} on the window", s.label),
            });
        }
    }
    Ok(())
}

/// The transported and the static member for profile `f` (with derivative
/// `df`) and velocity `c(t)`, `c(0) = 0`. The primitive of `c` is computed by
/// adaptive quadrature. Fails when either pressure is negative somewhere on
/// the sampled window.
pub fn family_general<F, D, C>(f: F, df: D, c: C, window: &Window) -> Result<(AnalyticSolution, AnalyticSolution)>
where
    F: Fn(f64) -> f64 + Send + Sync + Clone + 'static,
    D: Fn(f64) -> f64 + Send + Sync + Clone + 'static,
    C: Fn(f64) -> f64 + Send + Sync + Clone + 'static,
{
    if c(0.0).abs() > 1e-14 {
        return Err(Error::Input(format!(
            "velocity must vanish at t = 0, got c(0) = {}",
            c(0.0)
        )));
    }
    let cc = c.clone();
    let shift = move |t: f64| adaptive_simpson(&cc, 0.0, t, PRIMITIVE_TOL);
    let pair = (
        transported("transported".into(), f.clone(), df.clone(), c, shift),
        static_member("static".into(), f, df),
    );
    check_positive(&pair, window)?;
    Ok(pair)
}

fn gaussian(x: f64) -> f64 {
    (x * x).exp()
}

fn gaussian_deriv(x: f64) -> f64 {
    2.0 * x * (x * x).exp()
}

/// `f = e^{x^2}`, `c = -t / T`: the transported member has
/// `X = x + t^2 / (2T)` and `pi = e^{X^2} + t x / T`.
pub fn family_decelerating(t_ref: f64, window: &Window) -> Result<(AnalyticSolution, AnalyticSolution)> {
    if !(t_ref > 0.0) {
        return Err(Error::Input(format!("time scale must be positive, got {t_ref}")));
    }
    let pair = (
        transported(
            "decelerating".into(),
            gaussian,
            gaussian_deriv,
            move |t| -t / t_ref,
            move |t| -t * t / (2.0 * t_ref),
        ),
        static_member("static".into(), gaussian, gaussian_deriv),
    );
    check_positive(&pair, window)?;
    Ok(pair)
}

/// Constant velocity `-1/(2T)` from `t = 0` on: `(1, 2x e^{x^2}; 0, e^{x^2})`
/// against `(1, 2X e^{X^2}; -1/(2T), e^{X^2} + x/(2T))`, `X = x + t/(2T)`.
pub fn pair_remark(t_ref: f64) -> Result<(AnalyticSolution, AnalyticSolution)> {
    if !(t_ref > 0.0) {
        return Err(Error::Input(format!("time scale must be positive, got {t_ref}")));
    }
    let c = -0.5 / t_ref;
    Ok((
        static_member("static".into(), gaussian, gaussian_deriv),
        transported(
            "constant_drift".into(),
            gaussian,
            gaussian_deriv,
            move |_| c,
            move |t| c * t,
        ),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WeakResidual {
    pub continuity: f64,
    pub momentum: f64,
    pub constraint: f64,
}

impl WeakResidual {
    pub fn max(&self) -> f64 {
        self.continuity.max(self.momentum).max(self.constraint)
    }
}

/// `int int g` over the support of `phi` (clipped to the window), split at
/// the spline knots so every panel is smooth, Gauss-Legendre per panel.
fn integrate_on_bump(phi: &SpaceTimeBump, window: &Window, gl: &GaussLegendre, g: impl Fn(f64, f64) -> f64) -> f64 {
    let panels = |knots: [f64; 5], lo: f64, hi: f64| -> Vec<(f64, f64)> {
        knots
            .windows(2)
            .map(|w| (w[0].max(lo), w[1].min(hi)))
            .filter(|(a, b)| b > a)
            .collect()
    };
    let tp = panels(phi.time.knots(), 0.0, window.horizon);
    let xp = panels(phi.space.knots(), window.a, window.b);
    let mut total = 0.0;
    for &(t0, t1) in &tp {
        for (t, wt) in gl.mapped(t0, t1) {
            for &(x0, x1) in &xp {
                for (x, wx) in gl.mapped(x0, x1) {
                    total += wt * wx * g(t, x);
                }
            }
        }
    }
    total
}

/// Weak residuals of `rho_t + (rho u)_x = 0` and `m_t + (m u)_x = 0` against
/// the space-time bank of the middle half of the window, whose supports lie
/// inside the window and vanish at `t = 0` and `t = T` (so no boundary terms
/// arise), and `max |(1 - rho) pi|` on the quadrature nodes.
pub fn weak_residual(sol: &AnalyticSolution, window: &Window, order: usize) -> Result<WeakResidual> {
    let gl = GaussLegendre::new(order)?;
    let q = 0.25 * (window.b - window.a);
    let bank = space_time_bank(window.a + q, window.b - q, window.horizon);
    let mut out = WeakResidual {
        continuity: 0.0,
        momentum: 0.0,
        constraint: 0.0,
    };
    for phi in &bank {
        let rc = integrate_on_bump(phi, window, &gl, |t, x| {
            sol.rho(t, x) * (phi.dt(t, x) + sol.u(t, x) * phi.dx(t, x))
        });
        let rm = integrate_on_bump(phi, window, &gl, |t, x| {
            sol.m(t, x) * (phi.dt(t, x) + sol.u(t, x) * phi.dx(t, x))
        });
        out.continuity = out.continuity.max(rc.abs());
        out.momentum = out.momentum.max(rm.abs());
    }
    for (t, _) in gl.mapped(0.0, window.horizon) {
        for (x, _) in gl.mapped(window.a, window.b) {
            out.constraint = out.constraint.max(((1.0 - sol.rho(t, x)) * sol.pi(t, x)).abs());
        }
    }
    Ok(out)
}

/// `int hat g` split at the hat's kink, Gauss-Legendre of the given order.
fn pair_hat(hat: &Hat, gl: &GaussLegendre, g: impl Fn(f64) -> f64) -> f64 {
    let (a, b) = hat.support();
    let c = hat.center;
    gl.integrate(a, c, |x| hat.value(x) * g(x)) + gl.integrate(c, b, |x| hat.value(x) * g(x))
}

/// Dual Lipschitz distance between `m1(t, .)` and `m2(t, .)` over the hat
/// bank of `[a, b]`.
pub fn nonuniqueness_gap(
    s1: &AnalyticSolution,
    s2: &AnalyticSolution,
    t: f64,
    a: f64,
    b: f64,
    order: usize,
) -> Result<f64> {
    let gl = GaussLegendre::new(order)?;
    Ok(hat_bank(a, b)
        .iter()
        .map(|hat| pair_hat(hat, &gl, |x| s1.m(t, x) - s2.m(t, x)).abs())
        .fold(0.0, f64::max))
}

/// Largest `|rho1 - rho2|` or `|m1 - m2|` at `t = 0` on the window's sampling
/// nodes: the Cauchy data of the two members.
pub fn initial_data_gap(s1: &AnalyticSolution, s2: &AnalyticSolution, window: &Window) -> f64 {
    window
        .nodes()
        .take(SAMPLES)
        .map(|(_, x)| {
            (s1.rho(0.0, x) - s2.rho(0.0, x))
                .abs()
                .max((s1.m(0.0, x) - s2.m(0.0, x)).abs())
        })
        .fold(0.0, f64::max)
}

/// First sampled time in `[0, t_max]` at which `pi` of `sol` turns negative on
/// `[a, b]`, or `t_max` when it never does.
pub fn validity_horizon(sol: &AnalyticSolution, a: f64, b: f64, t_max: f64, steps: usize) -> f64 {
    let steps = steps.max(1);
    for k in 0..=steps {
        let t = t_max * k as f64 / steps as f64;
        let negative = (0..SAMPLES).any(|i| sol.pi(t, a + (b - a) * i as f64 / (SAMPLES - 1) as f64) < 0.0);
        if negative {
            return t;
        }
    }
    t_max
}

/// Samples `sol` on `cells` cells of `[-L, L]` at `times` and runs the
/// hard-congestion duality check on the samples.
pub fn sampled_hcl_check(
    sol: &AnalyticSolution,
    half_width: f64,
    cells: usize,
    times: &[f64],
    tol: &HclTolerances,
) -> Result<HclReport> {
    let sample = |f: &dyn Fn(f64, f64) -> f64, t: f64| GridField::from_fn(cells, half_width, |x| f(t, x));
    let rho = MeasureTrajectory::new(
        times.to_vec(),
        times
            .iter()
            .map(|&t| Measure1D::from_density(sample(&|t, x| sol.rho(t, x), t)))
            .collect(),
    )?;
    let m = MeasureTrajectory::new(
        times.to_vec(),
        times
            .iter()
            .map(|&t| Measure1D::from_density(sample(&|t, x| sol.m(t, x), t)))
            .collect(),
    )?;
    let pi: Vec<GridField> = times.iter().map(|&t| sample(&|t, x| sol.pi(t, x), t)).collect();
    let u = VelocityField::from_fn(
        times.to_vec(),
        VelocityField::lattice(half_width, cells),
        0.0,
        |t, x| sol.u(t, x),
    )?;
    hcl_duality_check(&rho, &m, &pi, &u, tol)
}

/// Bounds applied by [`pair_report`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PairTolerances {
    pub residual: f64,
    pub initial: f64,
    /// The gap at the window's horizon must exceed this.
    pub gap: f64,
}

impl Default for PairTolerances {
    fn default() -> Self {
        Self {
            residual: 1e-8,
            initial: 1e-14,
            gap: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MemberReport {
    pub label: String,
    pub residual: WeakResidual,
    pub min_pi: f64,
    pub validity_horizon: f64,
}

/// Weak residuals of both members, their shared Cauchy data and their
/// separation at the horizon.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairReport {
    pub window: Window,
    pub order: usize,
    pub members: [MemberReport; 2],
    pub initial_gap: f64,
    pub gap: f64,
    pub tolerances: PairTolerances,
    pub pass: bool,
}

pub fn pair_report(
    s1: &AnalyticSolution,
    s2: &AnalyticSolution,
    window: &Window,
    order: usize,
    tol: &PairTolerances,
) -> Result<PairReport> {
    let member = |s: &AnalyticSolution| -> Result<MemberReport> {
        Ok(MemberReport {
            label: s.label.clone(),
            residual: weak_residual(s, window, order)?,
            min_pi: s.min_pi(window),
            validity_horizon: validity_horizon(s, window.a, window.b, window.horizon, SAMPLES),
        })
    };
    let members = [member(s1)?, member(s2)?];
    let initial_gap = initial_data_gap(s1, s2, window);
    let gap = nonuniqueness_gap(s1, s2, window.horizon, window.a, window.b, order)?;
    let pass = members.iter().all(|m| m.residual.max() <= tol.residual) && initial_gap <= tol.initial && gap > tol.gap;
    Ok(PairReport {
        window: *window,
        order,
        members,
        initial_gap,
        gap,
        tolerances: *tol,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_window() -> Window {
        Window::new(1.0, -1.0, 1.0).unwrap()
    }

    #[test]
    fn zero_velocity_gives_two_equal_members() {
        let (a, b) = family_general(gaussian, gaussian_deriv, |_| 0.0, &unit_window()).unwrap();
        for i in 0..20 {
            let (t, x) = (0.05 * i as f64, -1.0 + 0.1 * i as f64);
            assert_eq!(a.m(t, x), b.m(t, x));
            assert_eq!(a.pi(t, x), b.pi(t, x));
        }
    }

    #[test]
    fn general_family_reproduces_the_decelerating_display() {
        let w = unit_window();
        let (g, _) = family_general(gaussian, gaussian_deriv, |t| -t, &w).unwrap();
        let (d, _) = family_decelerating(1.0, &w).unwrap();
        for i in 0..=10 {
            let (t, x) = (0.1 * i as f64, 0.7 - 0.13 * i as f64);
            let xi = x + t * t / 2.0;
            assert!((d.m(t, x) - 2.0 * xi * (xi * xi).exp()).abs() < 1e-13);
            assert!((d.pi(t, x) - ((xi * xi).exp() + t * x)).abs() < 1e-13);
            assert!((g.m(t, x) - d.m(t, x)).abs() < 1e-11);
            assert!((g.pi(t, x) - d.pi(t, x)).abs() < 1e-11);
        }
    }

    #[test]
    fn shared_initial_data() {
        let (a, b) = family_decelerating(1.0, &unit_window()).unwrap();
        assert_eq!(initial_data_gap(&a, &b, &unit_window()), 0.0);
        assert_eq!(a.pi(0.0, 0.3), b.pi(0.0, 0.3));
        assert!((a.m(0.0, 0.5) - 1.0 * 0.5f64.powi(2).exp()).abs() < 1e-15);
    }

    #[test]
    fn negative_pressure_is_rejected() {
        // f = x^2 + 0.01 with c = t: pi = f(X) - t x turns negative
        let r = family_general(|x: f64| x * x + 0.01, |x: f64| 2.0 * x, |t| t, &unit_window());
        assert!(matches!(r, Err(Error::Admissibility { .. })));
    }

    #[test]
    fn nonzero_initial_velocity_is_rejected() {
        let r = family_general(gaussian, gaussian_deriv, |_| 0.5, &unit_window());
        assert!(matches!(r, Err(Error::Input(_))));
    }

    #[test]
    fn static_member_has_zero_residual() {
        let (_, s) = family_decelerating(1.0, &unit_window()).unwrap();
        assert!(weak_residual(&s, &unit_window(), 12).unwrap().max() <= 1e-10);
    }

    #[test]
    fn transported_member_solves_on_the_wide_window() {
        let w = Window::new(1.0, -2.0, 2.0).unwrap();
        let (d, _) = family_decelerating(1.0, &w).unwrap();
        let r = weak_residual(&d, &w, 12).unwrap();
        assert!(r.max() <= 1e-8, "{r:?}");
    }

    #[test]
    fn a_wrong_sign_shift_is_detected() {
        // m transported against the flow fails the momentum equation
        let w = unit_window();
        let bad = transported("bad".into(), gaussian, gaussian_deriv, |t| -t, |t| t * t / 2.0);
        assert!(weak_residual(&bad, &w, 12).unwrap().momentum > 1e-2);
    }

    #[test]
    fn gap_vanishes_at_zero_and_against_itself() {
        let (a, b) = family_decelerating(1.0, &unit_window()).unwrap();
        assert_eq!(nonuniqueness_gap(&a, &b, 0.0, -1.0, 1.0, 12).unwrap(), 0.0);
        assert_eq!(nonuniqueness_gap(&a, &a, 1.0, -1.0, 1.0, 12).unwrap(), 0.0);
        assert!(nonuniqueness_gap(&a, &b, 1.0, -1.0, 1.0, 12).unwrap() > 0.1);
    }

    #[test]
    fn remark_pair_is_valid_for_all_sampled_times() {
        let (s, d) = pair_remark(1.0).unwrap();
        assert_eq!(initial_data_gap(&s, &d, &unit_window()), 0.0);
        assert!(d.min_pi(&unit_window()) >= 0.0);
        assert_eq!(validity_horizon(&d, -1.0, 1.0, 1.0, 100), 1.0);
        // c = -2: pi = e^{X^2} + 2x is positive at t = 0 and negative once X = 0 at x = -1
        let (_, fast) = pair_remark(0.25).unwrap();
        let t = validity_horizon(&fast, -1.0, 1.0, 1.0, 1000);
        assert!(t > 0.0 && t < 1.0, "{t}");
    }

    #[test]
    fn sampled_family_passes_the_duality_check() {
        let (d, _) = family_decelerating(1.0, &unit_window()).unwrap();
        let times: Vec<f64> = (0..=20).map(|k| 0.05 * k as f64).collect();
        // Euler flow and midpoint pairing are first order: tolerance 2 (h + sub-step) with sub-step = h
        let mut last = f64::INFINITY;
        for cells in [400, 800] {
            let h = 4.0 / cells as f64;
            let tol = HclTolerances {
                momentum_duality: 4.0 * h,
                ..HclTolerances::uniform(1e-3)
            };
            let r = sampled_hcl_check(&d, 2.0, cells, &times, &tol).unwrap();
            assert!(r.momentum_duality.value < 0.6 * last);
            last = r.momentum_duality.value;
            assert!(r.pass, "{r:?}");
        }
    }

    #[test]
    fn decelerating_pair_report_passes() {
        let w = unit_window();
        let (s1, s2) = family_decelerating(1.0, &w).unwrap();
        let r = pair_report(&s1, &s2, &w, 12, &PairTolerances::default()).unwrap();
        assert!(r.pass, "{r:?}");
        assert_eq!(r.members[0].validity_horizon, 1.0);
    }
}
