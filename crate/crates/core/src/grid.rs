//! Cell-centered uniform grids on a symmetric interval `[-L, L]`.
//!
//! A [`GridField`] stores one sample per cell. With `N` cells and spacing `h`
//! the half-width is `L = N h / 2`, cell `i` spans `[-L + i h, -L + (i+1) h]`
//! and its center sits at `-L + (i + 1/2) h`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridField {
    pub values: Vec<f64>,
    pub h: f64,
}

impl GridField {
    pub fn new(values: Vec<f64>, h: f64) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::Input(format!("grid spacing must be positive, got {h}")));
        }
        if let Some(cell) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Domain {
                field: "grid field",
                cell,
                value: values[cell],
            });
        }
        Ok(Self { values, h })
    }

    pub fn constant(cells: usize, h: f64, value: f64) -> Self {
        Self {
            values: vec![value; cells],
            h,
        }
    }

    /// Samples `f` at the cell centers of an `N`-cell grid on `[-L, L]`.
    pub fn from_fn(cells: usize, half_width: f64, f: impl Fn(f64) -> f64) -> Self {
        let h = 2.0 * half_width / cells as f64;
        let values = (0..cells).map(|i| f(cell_center(i, cells, h))).collect();
        Self { values, h }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn half_width(&self) -> f64 {
        0.5 * self.h * self.len() as f64
    }

    pub fn center(&self, i: usize) -> f64 {
        cell_center(i, self.len(), self.h)
    }

    /// Left edge of cell `i`; `face(N)` is the right end of the domain.
    pub fn face(&self, i: usize) -> f64 {
        let n = self.len() as f64;
        self.half_width() * (2.0 * i as f64 / n - 1.0)
    }

    pub fn centers(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.center(i)).collect()
    }

    pub fn faces(&self) -> Vec<f64> {
        (0..=self.len()).map(|i| self.face(i)).collect()
    }

    /// Index of the cell containing `x`, if inside the domain.
    pub fn cell_of(&self, x: f64) -> Option<usize> {
        let s = (x + self.half_width()) / self.h;
        if s < 0.0 || s > self.len() as f64 {
            return None;
        }
        Some((s.floor() as usize).min(self.len() - 1))
    }

    pub fn same_grid(&self, other: &GridField) -> Result<()> {
        let tol = 1e-12 * self.h.max(other.h);
        if self.len() != other.len() || (self.h - other.h).abs() > tol {
            return Err(Error::Shape {
                expected: self.len(),
                expected_h: self.h,
                found: other.len(),
                found_h: other.h,
            });
        }
        Ok(())
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> GridField {
        GridField {
            values: self.values.iter().map(|&v| f(v)).collect(),
            h: self.h,
        }
    }

    pub fn zip_map(&self, other: &GridField, f: impl Fn(f64, f64) -> f64) -> Result<GridField> {
        self.same_grid(other)?;
        Ok(GridField {
            values: self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect(),
            h: self.h,
        })
    }

    /// Centered difference in the interior, first-order one-sided at the two
    /// boundary cells.
    pub fn centered_diff(&self) -> GridField {
        GridField {
            values: centered_diff(&self.values, self.h),
            h: self.h,
        }
    }

    /// Discrete integral `sum_i v_i h`.
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.h
    }

    /// Discrete L1 norm `sum_i |v_i| h`.
    pub fn l1_norm(&self) -> f64 {
        self.values.iter().map(|v| v.abs()).sum::<f64>() * self.h
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Indices of the cells whose centers lie in `[a, b]`.
    pub fn window(&self, a: f64, b: f64) -> std::ops::Range<usize> {
        let first = (0..self.len()).find(|&i| self.center(i) >= a).unwrap_or(self.len());
        let last = (0..self.len())
            .rev()
            .find(|&i| self.center(i) <= b)
            .map_or(0, |i| i + 1);
        first..last.max(first)
    }

    /// Piecewise-linear interpolation through the cell centers, returning
    /// `outside` beyond the first/last center.
    pub fn interpolate(&self, x: f64, outside: f64) -> f64 {
        let n = self.len();
        let s = (x + self.half_width()) / self.h - 0.5;
        if !(s >= 0.0 && s <= (n - 1) as f64) {
            return outside;
        }
        let i = (s.floor() as usize).min(n.saturating_sub(2));
        let theta = s - i as f64;
        self.values[i] * (1.0 - theta) + self.values[(i + 1).min(n - 1)] * theta
    }
}

pub(crate) fn cell_center(i: usize, cells: usize, h: f64) -> f64 {
    let half = 0.5 * h * cells as f64;
    -half + (i as f64 + 0.5) * h
}

pub(crate) fn centered_diff(v: &[f64], h: f64) -> Vec<f64> {
    let n = v.len();
    match n {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..n)
            .map(|i| {
                if i == 0 {
                    (v[1] - v[0]) / h
                } else if i == n - 1 {
                    (v[n - 1] - v[n - 2]) / h
                } else {
                    (v[i + 1] - v[i - 1]) / (2.0 * h)
                }
            })
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometry_is_symmetric() {
        let g = GridField::constant(10, 0.5, 0.0);
        assert_eq!(g.half_width(), 2.5);
        assert_eq!(g.face(0), -2.5);
        assert_eq!(g.face(10), 2.5);
        assert_eq!(g.face(5), 0.0);
        assert!((g.center(0) + 2.25).abs() < 1e-15);
        assert_eq!(g.cell_of(0.1), Some(5));
        assert_eq!(g.cell_of(2.5), Some(9));
        assert_eq!(g.cell_of(3.0), None);
    }

    #[test]
    fn centered_difference_uses_one_sided_ends() {
        let g = GridField::new(vec![1.0, 2.0, 4.0, 8.0], 1.0).unwrap();
        assert_eq!(g.centered_diff().values, vec![1.0, 1.5, 3.0, 4.0]);
    }

    #[test]
    fn rejects_non_finite_samples() {
        assert!(matches!(
            GridField::new(vec![0.0, f64::NAN], 1.0),
            Err(Error::Domain { cell: 1, .. })
        ));
        assert!(GridField::new(vec![0.0], 0.0).is_err());
    }

    #[test]
    fn window_selects_centers() {
        let g = GridField::constant(8, 1.0, 0.0);
        // centers: -3.5 .. 3.5
        assert_eq!(g.window(-2.0, 2.0), 2..6);
        assert_eq!(g.window(10.0, 11.0).len(), 0);
    }

    #[test]
    fn interpolation_is_exact_for_linear_data() {
        let g = GridField::from_fn(20, 2.0, |x| 3.0 * x - 1.0);
        for &x in &[-1.5, 0.0, 0.37, 1.8] {
            assert!((g.interpolate(x, f64::NAN) - (3.0 * x - 1.0)).abs() < 1e-12);
        }
        assert_eq!(g.interpolate(1.99, 7.0), 7.0);
    }
}
