use crate::error::{Error, Result};
use crate::solver::Trajectory;

/// Slack on the one-sided Lipschitz check of lattice samples.
const OSL_SLACK: f64 = 1e-9;

/// Velocity samples `u(t_k, x_i)` on a space-time lattice, interpolated
/// linearly in `x` (constant beyond the lattice) and linearly in `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct VelocityField {
    times: Vec<f64>,
    xs: Vec<f64>,
    values: Vec<Vec<f64>>,
    osl_bound: f64,
    sup_bound: f64,
}

impl VelocityField {
    /// Validates shapes, `|u| <= sup_bound` and `D_c u <= osl_bound` at every
    /// interior lattice point.
    pub fn new(times: Vec<f64>, xs: Vec<f64>, values: Vec<Vec<f64>>, osl_bound: f64, sup_bound: f64) -> Result<Self> {
        let field = Self::unchecked(times, xs, values, osl_bound, sup_bound)?;
        for (k, row) in field.values.iter().enumerate() {
            if let Some(i) = row.iter().position(|v| v.abs() > sup_bound * (1.0 + 1e-12) + 1e-15) {
                return Err(Error::Input(format!(
                    "|u| = {} exceeds sup bound {sup_bound} at t = {}, x = {}",
                    row[i].abs(),
                    field.times[k],
                    field.xs[i]
                )));
            }
            for i in 1..row.len() - 1 {
                let slope = (row[i + 1] - row[i - 1]) / (field.xs[i + 1] - field.xs[i - 1]);
                if slope > osl_bound + OSL_SLACK {
                    return Err(Error::Input(format!(
                        "one-sided Lipschitz bound {osl_bound} violated: D_c u = {slope} at t = {}, x = {}",
                        field.times[k], field.xs[i]
                    )));
                }
            }
        }
        Ok(field)
    }

    /// Shape and finiteness checks only.
    pub(crate) fn unchecked(
        times: Vec<f64>,
        xs: Vec<f64>,
        values: Vec<Vec<f64>>,
        osl_bound: f64,
        sup_bound: f64,
    ) -> Result<Self> {
        if times.is_empty() || !strictly_increasing(&times) {
            return Err(Error::Input(
                "velocity times must be nonempty and strictly increasing".into(),
            ));
        }
        if xs.len() < 3 || !strictly_increasing(&xs) {
            return Err(Error::Input(
                "velocity lattice needs >= 3 strictly increasing points".into(),
            ));
        }
        if values.len() != times.len() || values.iter().any(|r| r.len() != xs.len()) {
            return Err(Error::Input("velocity samples do not match the lattice".into()));
        }
        if values.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::Input("velocity samples must be finite".into()));
        }
        if !(osl_bound >= 0.0 && sup_bound > 0.0 && osl_bound.is_finite() && sup_bound.is_finite()) {
            return Err(Error::Input(format!(
                "bounds must be finite with alpha >= 0 and sup > 0, got {osl_bound}, {sup_bound}"
            )));
        }
        Ok(Self {
            times,
            xs,
            values,
            osl_bound,
            sup_bound,
        })
    }

    /// Samples `f` on the lattice; the sup bound is measured.
    pub fn from_fn(times: Vec<f64>, xs: Vec<f64>, osl_bound: f64, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        let values: Vec<Vec<f64>> = times.iter().map(|&t| xs.iter().map(|&x| f(t, x)).collect()).collect();
        let sup = values
            .iter()
            .flatten()
            .fold(0.0_f64, |m, v| m.max(v.abs()))
            .max(f64::MIN_POSITIVE);
        Self::new(times, xs, values, osl_bound, sup)
    }

    /// Time-independent field.
    pub fn steady(xs: Vec<f64>, osl_bound: f64, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::from_fn(vec![0.0], xs, osl_bound, |_, x| f(x))
    }

    /// Snapshot velocities at the cell centers, with `alpha = max(0, max D_c u)`.
    pub fn from_trajectory(traj: &Trajectory) -> Result<Self> {
        let first = traj.initial();
        let xs = first.u.centers();
        let times = traj.times();
        let values: Vec<Vec<f64>> = traj.snapshots.iter().map(|s| s.u.values.clone()).collect();
        let alpha = traj
            .snapshots
            .iter()
            .map(|s| {
                let v = &s.u.values;
                (1..v.len() - 1)
                    .map(|i| (v[i + 1] - v[i - 1]) / (xs[i + 1] - xs[i - 1]))
                    .fold(0.0_f64, f64::max)
            })
            .fold(0.0_f64, f64::max);
        let sup = values
            .iter()
            .flatten()
            .fold(0.0_f64, |m, v| m.max(v.abs()))
            .max(f64::MIN_POSITIVE);
        Self::new(times, xs, values, alpha, sup)
    }

    /// `n + 1` equispaced nodes on `[-L, L]`.
    pub fn lattice(half_width: f64, intervals: usize) -> Vec<f64> {
        let h = 2.0 * half_width / intervals as f64;
        (0..=intervals).map(|i| -half_width + i as f64 * h).collect()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn samples(&self) -> &[Vec<f64>] {
        &self.values
    }

    pub fn osl_bound(&self) -> f64 {
        self.osl_bound
    }

    pub fn sup_bound(&self) -> f64 {
        self.sup_bound
    }

    /// Smallest lattice spacing.
    pub fn spacing(&self) -> f64 {
        self.xs.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min)
    }

    /// Flow sub-step `min(h / sup|u|, 1 / (4 max(alpha, 1)))`.
    pub fn substep(&self) -> f64 {
        (self.spacing() / self.sup_bound).min(0.25 / self.osl_bound.max(1.0))
    }

    fn row_value(&self, k: usize, x: f64) -> f64 {
        let xs = &self.xs;
        let row = &self.values[k];
        let n = xs.len();
        if x <= xs[0] {
            return row[0];
        }
        if x >= xs[n - 1] {
            return row[n - 1];
        }
        let j = xs.partition_point(|&p| p <= x).min(n - 1);
        let i = j - 1;
        let theta = (x - xs[i]) / (xs[j] - xs[i]);
        row[i] + theta * (row[j] - row[i])
    }

    pub fn value(&self, t: f64, x: f64) -> f64 {
        let ts = &self.times;
        let n = ts.len();
        if n == 1 || t <= ts[0] {
            return self.row_value(0, x);
        }
        if t >= ts[n - 1] {
            return self.row_value(n - 1, x);
        }
        let j = ts.partition_point(|&s| s <= t).min(n - 1);
        let i = j - 1;
        let theta = (t - ts[i]) / (ts[j] - ts[i]);
        let a = self.row_value(i, x);
        if theta == 0.0 {
            return a;
        }
        a + theta * (self.row_value(j, x) - a)
    }

    /// Index of the lattice time equal to `t`, if any.
    pub fn time_index(&self, t: f64) -> Option<usize> {
        self.times
            .iter()
            .position(|&s| (s - t).abs() <= 1e-12 * s.abs().max(1.0))
    }
}

pub(crate) fn strictly_increasing(v: &[f64]) -> bool {
    v.iter().all(|x| x.is_finite()) && v.windows(2).all(|w| w[1] > w[0])
}
