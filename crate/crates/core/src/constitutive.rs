//! Constitutive laws of the power-law Aw–Rascle system and the fields derived
//! from a state.
//!
//! With offset `p(rho) = rho^gamma` the potential solves `pi'(rho) = rho p'(rho)`,
//! giving `pi = gamma/(gamma+1) rho^(gamma+1)`, and the singular viscosity of the
//! equivalent pressureless Navier–Stokes form is `lambda = rho^2 p'(rho) =
//! gamma rho^(gamma+1) = (gamma+1) pi`.
//!
//! Powers are evaluated as `exp(gamma ln rho)` so that exponents up to ~100 do
//! not lose precision; `rho = 0` is an explicit branch. Densities above one are
//! evaluated with the same closed forms (no clamping).

use crate::error::{Error, Result};
use crate::grid::GridField;

/// `rho^e` for `rho >= 0`, computed in log space.
#[inline]
pub fn power(rho: f64, e: f64) -> f64 {
    if rho == 0.0 {
        0.0
    } else {
        (e * rho.ln()).exp()
    }
}

#[inline]
pub fn offset_at(rho: f64, gamma: f64) -> f64 {
    power(rho, gamma)
}

/// `p'(rho) = gamma rho^(gamma-1)`.
#[inline]
pub fn offset_slope_at(rho: f64, gamma: f64) -> f64 {
    gamma * power(rho, gamma - 1.0)
}

#[inline]
pub fn potential_at(rho: f64, gamma: f64) -> f64 {
    gamma / (gamma + 1.0) * power(rho, gamma + 1.0)
}

#[inline]
pub fn viscosity_at(rho: f64, gamma: f64) -> f64 {
    gamma * power(rho, gamma + 1.0)
}

/// Diffusivity `rho p'(rho) = gamma rho^gamma` of the density equation in the
/// `(rho, w)` formulation.
#[inline]
pub fn density_diffusivity_at(rho: f64, gamma: f64) -> f64 {
    gamma * power(rho, gamma)
}

fn nonnegative(rho: &GridField) -> Result<()> {
    match rho.values.iter().position(|&r| !(r >= 0.0)) {
        Some(cell) => Err(Error::Domain {
            field: "density",
            cell,
            value: rho.values[cell],
        }),
        None => Ok(()),
    }
}

fn positive(rho: &GridField) -> Result<()> {
    match rho.values.iter().position(|&r| !(r > 0.0)) {
        Some(cell) => Err(Error::Domain {
            field: "density",
            cell,
            value: rho.values[cell],
        }),
        None => Ok(()),
    }
}

pub fn offset(rho: &GridField, gamma: f64) -> Result<GridField> {
    nonnegative(rho)?;
    Ok(rho.map(|r| offset_at(r, gamma)))
}

pub fn potential(rho: &GridField, gamma: f64) -> Result<GridField> {
    nonnegative(rho)?;
    Ok(rho.map(|r| potential_at(r, gamma)))
}

pub fn viscosity(rho: &GridField, gamma: f64) -> Result<GridField> {
    nonnegative(rho)?;
    Ok(rho.map(|r| viscosity_at(r, gamma)))
}

/// Desired velocity `w = u + D_c p(rho)`.
pub fn desired_velocity(rho: &GridField, u: &GridField, gamma: f64) -> Result<GridField> {
    rho.same_grid(u)?;
    let dp = offset(rho, gamma)?.centered_diff();
    u.zip_map(&dp, |a, b| a + b)
}

/// Generalized momentum `m = rho u + D_c pi`.
pub fn generalized_momentum(rho: &GridField, u: &GridField, pi: &GridField) -> Result<GridField> {
    rho.same_grid(u)?;
    rho.same_grid(pi)?;
    let dpi = pi.centered_diff();
    let rho_u = rho.zip_map(u, |r, v| r * v)?;
    rho_u.zip_map(&dpi, |a, b| a + b)
}

/// Active potential `V = lambda(rho) D_c u`.
pub fn active_potential(rho: &GridField, u: &GridField, gamma: f64) -> Result<GridField> {
    rho.same_grid(u)?;
    let lambda = viscosity(rho, gamma)?;
    lambda.zip_map(&u.centered_diff(), |l, du| l * du)
}

/// Transported potential `W = D_c w / rho`; requires `rho > 0`.
pub fn transported_potential(rho: &GridField, w: &GridField) -> Result<GridField> {
    rho.same_grid(w)?;
    positive(rho)?;
    w.centered_diff().zip_map(rho, |dw, r| dw / r)
}
