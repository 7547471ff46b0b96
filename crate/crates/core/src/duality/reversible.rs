use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::GridField;
use crate::testbank::{Bump, Hat};

use super::flow::{filippov_flow, filippov_flow_with_stops};
use super::measure::{pushforward, Measure1D};
use super::velocity::VelocityField;

/// Compactly supported Lipschitz final datum of the backward problem.
pub trait Profile {
    fn value(&self, x: f64) -> f64;
    fn support(&self) -> (f64, f64);
}

impl Profile for Hat {
    fn value(&self, x: f64) -> f64 {
        Hat::value(self, x)
    }

    fn support(&self) -> (f64, f64) {
        Hat::support(self)
    }
}

impl Profile for Bump {
    fn value(&self, x: f64) -> f64 {
        Bump::value(self, x)
    }

    fn support(&self) -> (f64, f64) {
        Bump::support(self)
    }
}

/// Linear interpolation through the cell centers, zero beyond the outermost
/// nonzero cells.
impl Profile for GridField {
    fn value(&self, x: f64) -> f64 {
        let (a, b) = Profile::support(self);
        if x <= a || x >= b {
            return 0.0;
        }
        self.interpolate(x, 0.0)
    }

    fn support(&self) -> (f64, f64) {
        match self.values.iter().position(|&v| v != 0.0) {
            None => (0.0, 0.0),
            Some(first) => {
                let last = self.values.iter().rposition(|&v| v != 0.0).unwrap_or(first);
                (self.center(first) - self.h, self.center(last) + self.h)
            }
        }
    }
}

/// Samples `p(t_k, x_i)` of a reversible solution.
#[derive(Debug, Clone, PartialEq)]
pub struct ReversibleSolution {
    pub times: Vec<f64>,
    pub xs: Vec<f64>,
    pub values: Vec<Vec<f64>>,
}

/// Measures `mu(t_k)` at increasing times.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasureTrajectory {
    pub times: Vec<f64>,
    pub measures: Vec<Measure1D>,
}

impl MeasureTrajectory {
    pub fn new(times: Vec<f64>, measures: Vec<Measure1D>) -> Result<Self> {
        if times.is_empty() || times.len() != measures.len() || !super::velocity::strictly_increasing(&times) {
            return Err(Error::Input(
                "measure trajectory needs matching, strictly increasing times".into(),
            ));
        }
        Ok(Self { times, measures })
    }

    /// `mu0` pushed forward by the Filippov flow of `u` to each of `times`.
    pub fn pushforward(mu0: &Measure1D, u: &VelocityField, times: &[f64]) -> Result<Self> {
        let t0 = times.first().copied().unwrap_or(0.0);
        let t1 = times.last().copied().unwrap_or(0.0);
        let flow = filippov_flow_with_stops(u, &mu0.flow_seeds(), t0, t1, times)?;
        let measures = times
            .iter()
            .map(|&t| {
                let k = flow
                    .index_of(t)
                    .ok_or_else(|| Error::Input(format!("flow missed output time {t}")))?;
                pushforward(mu0, &flow, k)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(times.to_vec(), measures)
    }

    pub fn final_time(&self) -> f64 {
        *self.times.last().expect("nonempty trajectory")
    }
}

fn check_support(u: &VelocityField, profile: &dyn Profile) -> Result<()> {
    let (a, b) = profile.support();
    let xs = u.xs();
    let (lo, hi) = (xs[0], xs[xs.len() - 1]);
    if a <= lo {
        return Err(Error::Domain {
            field: "reversible profile support",
            cell: 0,
            value: a,
        });
    }
    if b >= hi {
        return Err(Error::Domain {
            field: "reversible profile support",
            cell: xs.len() - 1,
            value: b,
        });
    }
    Ok(())
}

/// `p(t, x) = profile(Phi_{t -> tau}(x))` at each point for each profile,
/// with one forward flow restarted at `t` shared by all profiles.
fn reversible_at(
    u: &VelocityField,
    profiles: &[&dyn Profile],
    t: f64,
    tau: f64,
    points: &[f64],
) -> Result<Vec<Vec<f64>>> {
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&i, &j| points[i].total_cmp(&points[j]));
    let sorted: Vec<f64> = order.iter().map(|&i| points[i]).collect();
    let flow = filippov_flow(u, &sorted, t, tau)?;
    let end = flow.final_positions();
    Ok(profiles
        .iter()
        .map(|p| {
            let mut out = vec![0.0; points.len()];
            for (s, &i) in order.iter().enumerate() {
                out[i] = p.value(end[s]);
            }
            out
        })
        .collect())
}

/// Reversible solution of `p_t + u p_x = 0`, `p(tau) = profile`, sampled at
/// `times` (all `<= tau`) and `xs`.
pub fn reversible_solve(
    u: &VelocityField,
    profile: &dyn Profile,
    tau: f64,
    times: &[f64],
    xs: &[f64],
) -> Result<ReversibleSolution> {
    check_support(u, profile)?;
    if let Some(&t) = times.iter().find(|&&t| !(t <= tau)) {
        return Err(Error::Input(format!(
            "reversible solution asked at t = {t} > tau = {tau}"
        )));
    }
    let values = times
        .iter()
        .map(|&t| reversible_at(u, &[profile], t, tau, xs).map(|mut v| v.remove(0)))
        .collect::<Result<Vec<_>>>()?;
    Ok(ReversibleSolution {
        times: times.to_vec(),
        xs: xs.to_vec(),
        values,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DualityResidual {
    /// `max |I_p(t) - I_p(0)| / max(|I_p(0)|, 1e-14)`.
    pub relative: f64,
    /// `max |I_p(t) - I_p(0)|`.
    pub absolute: f64,
    /// Profile index and time attaining the relative maximum.
    pub worst_profile: usize,
    pub worst_time: f64,
}

/// Variation of `I_p(t) = int p(t, x) mu(t, dx)` over the trajectory for the
/// reversible solutions ending in each profile at `tau`. The density part is
/// paired at the cell centers, atoms at their locations.
pub fn duality_residual<P: Profile>(
    traj: &MeasureTrajectory,
    u: &VelocityField,
    bank: &[P],
    tau: f64,
) -> Result<DualityResidual> {
    for p in bank {
        check_support(u, p)?;
    }
    if traj.final_time() > tau * (1.0 + 1e-12) + 1e-14 {
        return Err(Error::Input(format!("trajectory extends past tau = {tau}")));
    }
    let profiles: Vec<&dyn Profile> = bank.iter().map(|p| p as &dyn Profile).collect();
    let mut pairings = Vec::with_capacity(traj.times.len());
    for (&t, mu) in traj.times.iter().zip(&traj.measures) {
        let mut points = mu.ac.centers();
        points.extend(mu.atoms.iter().map(|a| a.0));
        let values = reversible_at(u, &profiles, t, tau, &points)?;
        let n = mu.cells();
        let h = mu.ac.h;
        let row: Vec<f64> = values
            .iter()
            .map(|p| {
                let ac: f64 = (0..n).map(|i| mu.ac.values[i] * p[i] * h).sum();
                ac + mu.atoms.iter().enumerate().map(|(j, a)| a.1 * p[n + j]).sum::<f64>()
            })
            .collect();
        pairings.push(row);
    }
    let mut out = DualityResidual {
        relative: 0.0,
        absolute: 0.0,
        worst_profile: 0,
        worst_time: traj.times[0],
    };
    for j in 0..bank.len() {
        let i0 = pairings[0][j];
        for (k, row) in pairings.iter().enumerate() {
            let d = (row[j] - i0).abs();
            let rel = d / i0.abs().max(1e-14);
            out.absolute = out.absolute.max(d);
            if rel > out.relative {
                out.relative = rel;
                out.worst_profile = j;
                out.worst_time = traj.times[k];
            }
        }
    }
    Ok(out)
}
