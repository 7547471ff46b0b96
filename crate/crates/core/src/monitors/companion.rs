use crate::constitutive::{potential_at, viscosity_at};
use crate::solver::FluidState;

/// Companion field evolved by `d_t pi + u d_x pi + lambda d_x u = 0`
/// (donor-cell transport with the old velocity, source from the new state),
/// compared with the closed form `pi(rho)` on the observation window.
#[derive(Debug, Clone)]
pub struct PiCompanion {
    gamma: f64,
    ghost: f64,
    window: std::ops::Range<usize>,
    pi: Vec<f64>,
    worst: f64,
}

impl PiCompanion {
    pub fn new(initial: &FluidState, gamma: f64, rho_bar: f64, window: (f64, f64)) -> Self {
        Self {
            gamma,
            ghost: potential_at(rho_bar, gamma),
            window: initial.rho.window(window.0, window.1),
            pi: initial.rho.values.iter().map(|&r| potential_at(r, gamma)).collect(),
            worst: 0.0,
        }
    }

    pub fn advance(&mut self, old: &FluidState, new: &FluidState) -> f64 {
        let dt = new.t - old.t;
        let h = old.h();
        let n = self.pi.len();
        let du = new.u.centered_diff();
        let prev = self.pi.clone();
        for i in 0..n {
            let left = if i == 0 { self.ghost } else { prev[i - 1] };
            let right = if i + 1 == n { self.ghost } else { prev[i + 1] };
            let u = old.u.values[i];
            let adv = u.max(0.0) * (prev[i] - left) + u.min(0.0) * (right - prev[i]);
            let source = viscosity_at(new.rho.values[i], self.gamma) * du.values[i];
            self.pi[i] = prev[i] - dt / h * adv - dt * source;
        }
        let gap: f64 = self
            .window
            .clone()
            .map(|i| (self.pi[i] - potential_at(new.rho.values[i], self.gamma)).abs() * h)
            .sum();
        self.worst = self.worst.max(gap);
        gap
    }

    /// `max_t |pi_tilde - pi(rho)|_{L1(K)}` so far.
    pub fn defect(&self) -> f64 {
        self.worst
    }
}
