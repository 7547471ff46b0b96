//! Fixed banks of compactly supported test functions used by every weak
//! residual and dual-norm computation.
//!
//! * Space-time bank: tensor products of cubic B-spline bumps, 3 spatial
//!   half-widths `(b-a) {1/12, 1/6, 1/3}` × 5 centers `a + (b-a) j/6`,
//!   `j = 1..5`, × 3 temporal half-widths `T {1/2, 1/3, 1/6}` centered at `T/2`.
//!   Bumps are scaled to peak value 1.
//! * Hat bank: 15 hats with the same widths and centers, of height equal to
//!   the half-width so that every profile is 1-Lipschitz with total variation
//!   `2 w`.

use serde::{Deserialize, Serialize};

pub const BANK_VERSION: u32 = 1;

const WIDTH_FRACTIONS: [f64; 3] = [1.0 / 12.0, 1.0 / 6.0, 1.0 / 3.0];
const TIME_FRACTIONS: [f64; 3] = [0.5, 1.0 / 3.0, 1.0 / 6.0];

/// Cubic B-spline on `[-2, 2]` scaled to `B(0) = 1`.
pub fn cubic_bspline(s: f64) -> f64 {
    let a = s.abs();
    if a >= 2.0 {
        0.0
    } else if a >= 1.0 {
        0.25 * (2.0 - a).powi(3)
    } else {
        1.0 - 1.5 * a * a + 0.75 * a * a * a
    }
}

pub fn cubic_bspline_deriv(s: f64) -> f64 {
    let a = s.abs();
    let d = if a >= 2.0 {
        0.0
    } else if a >= 1.0 {
        -0.75 * (2.0 - a).powi(2)
    } else {
        -3.0 * a + 2.25 * a * a
    };
    d * s.signum()
}

/// Bump `B(2 (x - center) / half_width)` supported on `center ± half_width`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bump {
    pub center: f64,
    pub half_width: f64,
}

impl Bump {
    pub fn value(&self, x: f64) -> f64 {
        cubic_bspline(2.0 * (x - self.center) / self.half_width)
    }

    pub fn deriv(&self, x: f64) -> f64 {
        2.0 / self.half_width * cubic_bspline_deriv(2.0 * (x - self.center) / self.half_width)
    }

    pub fn support(&self) -> (f64, f64) {
        (self.center - self.half_width, self.center + self.half_width)
    }

    /// Spline knots, where the bump is only C².
    pub fn knots(&self) -> [f64; 5] {
        let q = 0.5 * self.half_width;
        [-2.0, -1.0, 0.0, 1.0, 2.0].map(|k| self.center + k * q)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpaceTimeBump {
    pub space: Bump,
    pub time: Bump,
}

impl SpaceTimeBump {
    pub fn value(&self, t: f64, x: f64) -> f64 {
        self.time.value(t) * self.space.value(x)
    }

    pub fn dx(&self, t: f64, x: f64) -> f64 {
        self.time.value(t) * self.space.deriv(x)
    }

    pub fn dt(&self, t: f64, x: f64) -> f64 {
        self.time.deriv(t) * self.space.value(x)
    }
}

fn centers(a: f64, b: f64) -> impl Iterator<Item = f64> {
    (1..=5).map(move |j| a + (b - a) * j as f64 / 6.0)
}

pub fn space_bank(a: f64, b: f64) -> Vec<Bump> {
    let mut out = Vec::with_capacity(15);
    for frac in WIDTH_FRACTIONS {
        for c in centers(a, b) {
            out.push(Bump {
                center: c,
                half_width: (b - a) * frac,
            });
        }
    }
    out
}

/// The 45 space-time bumps over `[a, b] × [0, horizon]`.
pub fn space_time_bank(a: f64, b: f64, horizon: f64) -> Vec<SpaceTimeBump> {
    let mut out = Vec::with_capacity(45);
    for space in space_bank(a, b) {
        for frac in TIME_FRACTIONS {
            out.push(SpaceTimeBump {
                space,
                time: Bump {
                    center: 0.5 * horizon,
                    half_width: horizon * frac,
                },
            });
        }
    }
    out
}

/// Hat of slope ±1 and height `half_width`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hat {
    pub center: f64,
    pub half_width: f64,
}

impl Hat {
    pub fn value(&self, x: f64) -> f64 {
        (self.half_width - (x - self.center).abs()).max(0.0)
    }

    pub fn support(&self) -> (f64, f64) {
        (self.center - self.half_width, self.center + self.half_width)
    }

    pub fn total_variation(&self) -> f64 {
        2.0 * self.half_width
    }

    /// Exact integral of the hat over `[lo, hi]`.
    pub fn integral(&self, lo: f64, hi: f64) -> f64 {
        let prim = |x: f64| -> f64 {
            let (s0, s1) = self.support();
            let y = x.clamp(s0, s1);
            let c = self.center;
            let w = self.half_width;
            if y <= c {
                let d = y - s0;
                0.5 * d * d
            } else {
                let d = s1 - y;
                w * w - 0.5 * d * d
            }
        };
        prim(hi) - prim(lo)
    }
}

pub fn hat_bank(a: f64, b: f64) -> Vec<Hat> {
    space_bank(a, b)
        .into_iter()
        .map(|bump| Hat {
            center: bump.center,
            half_width: bump.half_width,
        })
        .collect()
}
