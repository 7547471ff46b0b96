use crate::error::{Error, Result};

use super::flow::{pool_adjacent_violators, FlowMap};
use super::velocity::VelocityField;

/// Jumps larger than this multiple of `sup|u| h` count as discontinuities.
pub const JUMP_FACTOR: f64 = 10.0;

/// Relative tolerance for two flow particles to count as stuck together.
const STICK_TOL: f64 = 1e-12;

/// The velocity `u` sampled at every recorded flow time, corrected at each
/// discontinuity that carries a sticking cluster: the node nearest to the
/// cluster takes the cluster's own speed, the difference quotient of its
/// trajectory. Away from such clusters the samples are those of `u`.
pub fn universal_representative(u: &VelocityField, flow: &FlowMap) -> Result<VelocityField> {
    if flow.times.len() < 2 {
        return Err(Error::Input(
            "representative needs a flow with at least one step".into(),
        ));
    }
    let xs = u.xs();
    let threshold = JUMP_FACTOR * u.sup_bound() * u.spacing();
    let scale = xs[xs.len() - 1].abs().max(xs[0].abs());
    let last = flow.times.len() - 1;
    let mut rows = Vec::with_capacity(flow.times.len());
    for (k, &t) in flow.times.iter().enumerate() {
        let mut row: Vec<f64> = xs.iter().map(|&x| u.value(t, x)).collect();
        let pos = &flow.positions[k];
        // forward difference quotient; past the last record, one more sub-step
        let (next, dt) = if k < last {
            (flow.positions[k + 1].clone(), flow.times[k + 1] - t)
        } else {
            let dt = flow.times[k] - flow.times[k - 1];
            let mut x: Vec<f64> = pos.iter().map(|&x| x + dt * u.value(t, x)).collect();
            pool_adjacent_violators(&mut x);
            (x, dt)
        };
        let mut i = 0;
        while i < pos.len() {
            let mut j = i + 1;
            while j < pos.len() && pos[j] - pos[i] <= STICK_TOL * scale.max(1.0) {
                j += 1;
            }
            if j - i >= 2 {
                let x = pos[i];
                let node = nearest_node(xs, x);
                if jump_near(&row, node, threshold) {
                    row[node] = (next[i] - pos[i]) / dt;
                }
            }
            i = j;
        }
        rows.push(row);
    }
    VelocityField::unchecked(flow.times.clone(), xs.to_vec(), rows, u.osl_bound(), u.sup_bound())
}

fn nearest_node(xs: &[f64], x: f64) -> usize {
    let j = xs.partition_point(|&p| p < x);
    if j == 0 {
        0
    } else if j == xs.len() || x - xs[j - 1] <= xs[j] - x {
        j - 1
    } else {
        j
    }
}

fn jump_near(row: &[f64], node: usize, threshold: f64) -> bool {
    let lo = node.saturating_sub(1);
    let hi = (node + 1).min(row.len() - 1);
    (lo..hi).any(|i| (row[i + 1] - row[i]).abs() > threshold)
}
