//! Seeded random admissible data for property-style checks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::duality::VelocityField;
use crate::error::{Error, Result};
use crate::grid::GridField;
use crate::params::Params;
use crate::solver::{validate_initial, FluidState};

/// Draws tried per accepted datum before giving up.
const MAX_DRAWS: usize = 200;

/// Sum of Gaussian bumps `sum a_k exp(-(x - c_k)^2 / s_k^2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BumpSum {
    pub terms: Vec<(f64, f64, f64)>,
}

impl BumpSum {
    pub fn value(&self, x: f64) -> f64 {
        self.terms
            .iter()
            .map(|&(a, c, s)| a * (-((x - c) / s).powi(2)).exp())
            .sum()
    }

    fn draw(rng: &mut ChaCha8Rng, count: usize, amp: (f64, f64), reach: f64) -> Self {
        let terms = (0..count)
            .map(|_| {
                (
                    rng.gen_range(amp.0..amp.1),
                    rng.gen_range(-reach..reach),
                    rng.gen_range(0.25..0.8),
                )
            })
            .collect();
        Self { terms }
    }
}

/// `count` data drawn from `seed` that pass every applicable admissibility
/// check for `params`. Densities are `rho_bar` plus one to three bumps,
/// velocities are one to three bumps of either sign, both centred in the
/// observation window; the far field is at rest.
pub fn admissible_corpus(params: &Params, seed: u64, count: usize) -> Result<Vec<FluidState>> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let reach = 0.25 * params.half_width;
    let cap = params.density_cap();
    let mut out = Vec::with_capacity(count);
    let mut draws = 0;
    while out.len() < count {
        draws += 1;
        if draws > MAX_DRAWS * count.max(1) {
            return Err(Error::Admissibility {
                bound: "corpus",
                detail: format!(
                    "only {} of {count} admissible data after {} draws",
                    out.len(),
                    draws - 1
                ),
            });
        }
        let up = cap.min(1.0) - params.rho_bar;
        let down = params.rho_bar - params.r0;
        let nr = rng.gen_range(1..=3);
        let nu = rng.gen_range(1..=3);
        let rho_b = BumpSum::draw(&mut rng, nr, (-down, up.max(0.0) + 1e-12), reach);
        let u_b = BumpSum::draw(&mut rng, nu, (-0.6, 0.6), reach);
        let rho_bar = params.rho_bar;
        let rho = GridField::from_fn(params.cells, params.half_width, |x| {
            (rho_bar + rho_b.value(x)).clamp(params.r0, cap.min(1.0))
        });
        let u = GridField::from_fn(params.cells, params.half_width, |x| u_b.value(x));
        let state = FluidState::new(0.0, rho, u, [0.0, 0.0])?;
        if validate_initial(&state, params)?.pass() {
            out.push(state);
        }
    }
    Ok(out)
}

/// `count` space-time velocity fields drawn from `seed`, sampled on
/// `cells + 1` nodes of `[-L, L]` at `time_samples` equispaced times of
/// `[0, horizon]`. Each is `-sum a_k tanh((x - c_k - s_k t) / d_k)` (one to
/// three moving compressive fronts, some nearly shocks) plus `b sin(k x + w t)`;
/// the fronts are nonincreasing in `x`, so `alpha = b k`.
pub fn velocity_corpus(
    seed: u64,
    count: usize,
    half_width: f64,
    cells: usize,
    horizon: f64,
    time_samples: usize,
) -> Result<Vec<VelocityField>> {
    if time_samples < 2 || !(horizon > 0.0) {
        return Err(Error::Input(
            "velocity corpus needs >= 2 time samples on a positive horizon".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let reach = 0.25 * half_width;
    let xs = VelocityField::lattice(half_width, cells);
    let times: Vec<f64> = (0..time_samples)
        .map(|k| horizon * k as f64 / (time_samples - 1) as f64)
        .collect();
    (0..count)
        .map(|_| {
            let fronts: Vec<(f64, f64, f64, f64)> = (0..rng.gen_range(1..=3))
                .map(|_| {
                    (
                        rng.gen_range(0.1..0.5),
                        rng.gen_range(-reach..reach),
                        rng.gen_range(-0.3..0.3),
                        10f64.powf(rng.gen_range(-2.0..-0.5)),
                    )
                })
                .collect();
            let b = rng.gen_range(0.0..0.3);
            let k = rng.gen_range(1.0..3.0);
            let w = rng.gen_range(-2.0..2.0);
            VelocityField::from_fn(times.clone(), xs.clone(), b * k, |t, x| {
                let front: f64 = fronts
                    .iter()
                    .map(|&(a, c, s, d)| -a * ((x - c - s * t) / d).tanh())
                    .sum();
                front + b * (k * x + w * t).sin()
            })
        })
        .collect()
}
