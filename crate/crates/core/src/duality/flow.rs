use crate::error::{Error, Result};

use super::velocity::VelocityField;

/// Forward Filippov trajectories recorded at every sub-step.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowMap {
    pub times: Vec<f64>,
    pub x0: Vec<f64>,
    /// `positions[k][i]`: position at `times[k]` of the particle started at `x0[i]`.
    pub positions: Vec<Vec<f64>>,
    pub substep: f64,
}

impl FlowMap {
    pub fn final_positions(&self) -> &[f64] {
        self.positions.last().expect("flow has at least its start time")
    }

    /// Index of the recorded time equal to `t`.
    pub fn index_of(&self, t: f64) -> Option<usize> {
        self.times
            .iter()
            .position(|&s| (s - t).abs() <= 1e-12 * s.abs().max(1.0))
    }

    /// Index of the recorded time nearest to `t`.
    pub fn nearest_index(&self, t: f64) -> usize {
        let j = self.times.partition_point(|&s| s < t);
        if j == 0 {
            0
        } else if j == self.times.len() || t - self.times[j - 1] <= self.times[j] - t {
            j - 1
        } else {
            j
        }
    }

    /// Positions at `t`, linear between recorded times.
    pub fn at(&self, t: f64) -> Vec<f64> {
        let n = self.times.len();
        if t <= self.times[0] {
            return self.positions[0].clone();
        }
        if t >= self.times[n - 1] {
            return self.positions[n - 1].clone();
        }
        let j = self.times.partition_point(|&s| s <= t);
        let i = j - 1;
        let theta = (t - self.times[i]) / (self.times[j] - self.times[i]);
        self.positions[i]
            .iter()
            .zip(&self.positions[j])
            .map(|(a, b)| a + theta * (b - a))
            .collect()
    }
}

/// Integrates `dX/dt = u(t, X)` from `t0` to `t1` for the nondecreasing
/// starting points `x0` by explicit Euler. Steps are at most `u.substep()` and
/// land on every lattice time of `u` in between. After each step crossing
/// particles are pooled to their common mean (pool-adjacent-violators), which
/// makes them stick: pooled particles share a position and hence a velocity.
pub fn filippov_flow(u: &VelocityField, x0: &[f64], t0: f64, t1: f64) -> Result<FlowMap> {
    filippov_flow_with_stops(u, x0, t0, t1, &[])
}

/// As [`filippov_flow`], additionally landing on every time in `stops`.
pub fn filippov_flow_with_stops(u: &VelocityField, x0: &[f64], t0: f64, t1: f64, stops: &[f64]) -> Result<FlowMap> {
    if !(t0.is_finite() && t1.is_finite() && t1 >= t0) {
        return Err(Error::Input(format!("flow interval [{t0}, {t1}] is invalid")));
    }
    if x0.iter().any(|x| !x.is_finite()) || x0.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Input(
            "flow starting points must be finite and nondecreasing".into(),
        ));
    }
    let dt_max = u.substep();
    let mut stops: Vec<f64> = u
        .times()
        .iter()
        .chain(stops)
        .copied()
        .filter(|&s| s > t0 && s < t1)
        .collect();
    stops.push(t1);
    stops.sort_by(f64::total_cmp);
    stops.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * a.abs().max(1.0));
    let mut times = vec![t0];
    let mut positions = vec![x0.to_vec()];
    let mut x = x0.to_vec();
    let mut t = t0;
    for &stop in &stops {
        while t < stop {
            let remaining = stop - t;
            let steps = (remaining / dt_max * (1.0 - 1e-12)).ceil().max(1.0);
            let dt = remaining / steps;
            for xi in x.iter_mut() {
                *xi += dt * u.value(t, *xi);
            }
            pool_adjacent_violators(&mut x);
            t = if steps == 1.0 { stop } else { t + dt };
            debug_assert!(x.windows(2).all(|w| w[0] <= w[1]));
            times.push(t);
            positions.push(x.clone());
        }
    }
    Ok(FlowMap {
        times,
        x0: x0.to_vec(),
        positions,
        substep: dt_max,
    })
}

/// In-place isotonic regression with unit weights: the closest nondecreasing
/// sequence in least squares, obtained by replacing violating runs by their mean.
pub fn pool_adjacent_violators(x: &mut [f64]) {
    if x.windows(2).all(|w| w[0] <= w[1]) {
        return;
    }
    let mut blocks: Vec<(f64, usize)> = Vec::with_capacity(x.len());
    for &v in x.iter() {
        blocks.push((v, 1));
        while blocks.len() > 1 {
            let (s1, n1) = blocks[blocks.len() - 1];
            let (s0, n0) = blocks[blocks.len() - 2];
            if s0 / n0 as f64 > s1 / n1 as f64 {
                blocks.pop();
                let last = blocks.len() - 1;
                blocks[last] = (s0 + s1, n0 + n1);
            } else {
                break;
            }
        }
    }
    let mut i = 0;
    for (s, n) in blocks {
        let mean = s / n as f64;
        for v in &mut x[i..i + n] {
            *v = mean;
        }
        i += n;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sign_field(half_width: f64, intervals: usize) -> VelocityField {
        VelocityField::steady(VelocityField::lattice(half_width, intervals), 0.0, |x| {
            if x == 0.0 {
                0.0
            } else {
                -x.signum()
            }
        })
        .unwrap()
    }

    #[test]
    fn constant_field_translates() {
        let u = VelocityField::steady(VelocityField::lattice(3.0, 30), 0.0, |_| 0.7).unwrap();
        let x0 = [-1.0, 0.0, 0.5];
        let f = filippov_flow(&u, &x0, 0.0, 1.0).unwrap();
        for (x, y) in x0.iter().zip(f.final_positions()) {
            assert!((y - (x + 0.7)).abs() < 1e-14);
        }
    }

    #[test]
    fn sign_field_matches_sticking_solution() {
        let u = sign_field(2.0, 400);
        let h = u.spacing();
        let x0: Vec<f64> = (0..=200).map(|i| -1.0 + i as f64 * 0.01 + 0.003).collect();
        let f = filippov_flow(&u, &x0, 0.0, 1.0).unwrap();
        let mut worst = 0.0_f64;
        for (k, &t) in f.times.iter().enumerate() {
            for (i, &x) in x0.iter().enumerate() {
                let exact = x.signum() * (x.abs() - t).max(0.0);
                worst = worst.max((f.positions[k][i] - exact).abs());
            }
        }
        assert!(worst <= 2.0 * f.substep + h, "{worst}");
    }

    #[test]
    fn linear_field_grows_exponentially() {
        let u = VelocityField::steady(VelocityField::lattice(4.0, 800), 1.0, |x| x).unwrap();
        let f = filippov_flow(&u, &[0.5], 0.0, 1.0).unwrap();
        let err = (f.final_positions()[0] - 0.5 * 1f64.exp()).abs();
        assert!(err < 0.5 * 1f64.exp() * f.substep, "{err}");
    }

    #[test]
    fn steps_land_on_lattice_times() {
        let u = VelocityField::from_fn(vec![0.0, 0.33, 0.5], VelocityField::lattice(1.0, 10), 0.0, |_, _| 0.1).unwrap();
        let f = filippov_flow(&u, &[0.0], 0.0, 1.0).unwrap();
        assert!(f.index_of(0.33).is_some() && f.index_of(0.5).is_some());
        assert_eq!(*f.times.last().unwrap(), 1.0);
        let g = filippov_flow_with_stops(&u, &[0.0], 0.0, 1.0, &[0.7, 0.7, 2.0]).unwrap();
        assert!(g.index_of(0.7).is_some() && g.index_of(0.33).is_some());
        assert!(g.times.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn pav_pools_violators_to_their_mean() {
        let mut x = [0.0, 2.0, 1.0, 3.0];
        pool_adjacent_violators(&mut x);
        assert_eq!(x, [0.0, 1.5, 1.5, 3.0]);
        let mut y = [3.0, 2.0, 1.0];
        pool_adjacent_violators(&mut y);
        assert_eq!(y, [2.0, 2.0, 2.0]);
    }

    proptest! {
        #[test]
        fn pav_output_is_sorted_and_mean_preserving(v in prop::collection::vec(-10.0f64..10.0, 1..40)) {
            let mut w = v.clone();
            pool_adjacent_violators(&mut w);
            prop_assert!(w.windows(2).all(|p| p[0] <= p[1]));
            let s0: f64 = v.iter().sum();
            let s1: f64 = w.iter().sum();
            prop_assert!((s0 - s1).abs() < 1e-9);
        }

        #[test]
        fn flow_preserves_order(
            amp in 0.1f64..1.0,
            c in -0.5f64..0.5,
            pts in prop::collection::vec(-1.5f64..1.5, 2..30),
        ) {
            let u = VelocityField::steady(VelocityField::lattice(2.0, 80), 0.0, |x| -amp * ((x - c) * 8.0).tanh()).unwrap();
            let mut x0 = pts.clone();
            x0.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let f = filippov_flow(&u, &x0, 0.0, 1.0).unwrap();
            for row in &f.positions {
                prop_assert!(row.windows(2).all(|p| p[0] <= p[1]));
            }
        }
    }
}
