//! Thomas algorithm for tridiagonal systems.

use crate::error::{Error, Result};

/// Solves `A x = rhs` in place, where `A` has sub-diagonal `lower[1..]`,
/// diagonal `diag` and super-diagonal `upper[..n-1]`.
///
/// The implicit diffusion matrices assembled by the solver are weakly
/// diagonally dominant with a positive diagonal, so no pivoting is needed.
/// A vanishing pivot is reported as a solver error.
pub fn solve(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &mut [f64]) -> Result<()> {
    let n = diag.len();
    if lower.len() != n || upper.len() != n || rhs.len() != n {
        return Err(Error::Solver(format!(
            "band lengths {}/{}/{} do not match rhs {}",
            lower.len(),
            n,
            upper.len(),
            rhs.len()
        )));
    }
    if n == 0 {
        return Ok(());
    }
    let mut c = vec![0.0; n];
    let mut pivot = diag[0];
    check_pivot(pivot, 0)?;
    c[0] = upper[0] / pivot;
    rhs[0] /= pivot;
    for i in 1..n {
        pivot = diag[i] - lower[i] * c[i - 1];
        check_pivot(pivot, i)?;
        c[i] = if i + 1 < n { upper[i] / pivot } else { 0.0 };
        rhs[i] = (rhs[i] - lower[i] * rhs[i - 1]) / pivot;
    }
    for i in (0..n - 1).rev() {
        rhs[i] -= c[i] * rhs[i + 1];
    }
    Ok(())
}

fn check_pivot(pivot: f64, row: usize) -> Result<()> {
    if pivot.abs() <= f64::MIN_POSITIVE || !pivot.is_finite() {
        Err(Error::Solver(format!("zero pivot at row {row}")))
    } else {
        Ok(())
    }
}

/// Returns the first row violating weak diagonal dominance, if any.
pub fn dominance_violation(lower: &[f64], diag: &[f64], upper: &[f64]) -> Option<usize> {
    (0..diag.len()).find(|&i| {
        let off = lower[i].abs() * (i > 0) as u8 as f64 + upper[i].abs() * (i + 1 < diag.len()) as u8 as f64;
        diag[i] < off * (1.0 - 1e-14)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn matvec(lower: &[f64], diag: &[f64], upper: &[f64], x: &[f64]) -> Vec<f64> {
        let n = x.len();
        (0..n)
            .map(|i| {
                let mut s = diag[i] * x[i];
                if i > 0 {
                    s += lower[i] * x[i - 1];
                }
                if i + 1 < n {
                    s += upper[i] * x[i + 1];
                }
                s
            })
            .collect()
    }

    #[test]
    fn solves_small_system() {
        // [2 -1 0; -1 2 -1; 0 -1 2] x = [1, 0, 1] -> x = [1, 1, 1]
        let lower = [0.0, -1.0, -1.0];
        let diag = [2.0, 2.0, 2.0];
        let upper = [-1.0, -1.0, 0.0];
        let mut rhs = [1.0, 0.0, 1.0];
        solve(&lower, &diag, &upper, &mut rhs).unwrap();
        for v in rhs {
            assert!((v - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn reports_zero_pivot_and_bad_lengths() {
        let mut rhs = [1.0, 1.0];
        assert!(solve(&[0.0, 1.0], &[0.0, 1.0], &[1.0, 0.0], &mut rhs).is_err());
        assert!(solve(&[0.0], &[1.0, 1.0], &[0.0, 0.0], &mut rhs).is_err());
    }

    #[test]
    fn detects_dominance_loss() {
        assert_eq!(dominance_violation(&[0.0, -1.0], &[2.0, 0.5], &[-1.0, 0.0]), Some(1));
        assert_eq!(dominance_violation(&[0.0, -1.0], &[2.0, 1.0], &[-1.0, 0.0]), None);
    }

    proptest! {
        #[test]
        fn residual_is_small_for_dominant_systems(
            rows in proptest::collection::vec((0.0f64..2.0, 0.0f64..2.0, 0.01f64..3.0, -5.0f64..5.0), 1..60)
        ) {
            let n = rows.len();
            let lower: Vec<f64> = rows.iter().map(|r| -r.0).collect();
            let upper: Vec<f64> = rows.iter().map(|r| -r.1).collect();
            let diag: Vec<f64> = rows.iter().map(|r| r.0 + r.1 + r.2).collect();
            let b: Vec<f64> = rows.iter().map(|r| r.3).collect();
            let mut x = b.clone();
            solve(&lower, &diag, &upper, &mut x).unwrap();
            let ax = matvec(&lower, &diag, &upper, &x);
            for i in 0..n {
                prop_assert!((ax[i] - b[i]).abs() < 1e-10 * (1.0 + b[i].abs()));
            }
        }
    }
}
