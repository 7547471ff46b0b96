//! Numerical laboratory for the hard-congestion limit of the one-dimensional
//! generalized Aw-Rascle system.
//!
//! The viscous approximation with offset `p(rho) = rho^gamma` is integrated
//! on a truncated line, every a priori estimate is evaluated as a discrete
//! monitor, and the duality-solution machinery (Filippov flow, pushforward of
//! measures, reversible solutions) is available for the limit objects.

// `!(x > 0.0)` rejects NaN along with nonpositive values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod constitutive;
pub mod corpus;
pub mod counterexamples;
pub mod duality;
pub mod error;
pub mod grid;
pub mod monitors;
pub mod params;
pub mod quadrature;
pub mod solver;
pub mod testbank;
pub mod tridiag;

pub use error::{Error, Result};
pub use grid::GridField;
pub use params::Params;
