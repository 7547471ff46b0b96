use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A field value is outside the domain of a constitutive law.
    #[error("domain error in {field}: cell {cell} has value {value}")]
    Domain {
        field: &'static str,
        cell: usize,
        value: f64,
    },

    #[error("shape mismatch: expected {expected} cells with h = {expected_h}, found {found} cells with h = {found_h}")]
    Shape {
        expected: usize,
        expected_h: f64,
        found: usize,
        found_h: f64,
    },

    #[error("time step {dt} exceeds the CFL limit {limit}")]
    StepSize { dt: f64, limit: f64 },

    #[error("linear solver failure: {0}")]
    Solver(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    /// Initial data violates one of the admissibility bounds.
    #[error("admissibility bound {bound} violated: {detail}")]
    Admissibility { bound: &'static str, detail: String },

    #[error("invalid input: {0}")]
    Input(String),

    /// A hard invariant failed during a run.
    #[error("invariant `{invariant}` failed at step {step}: {detail}")]
    Monitor {
        step: usize,
        invariant: String,
        detail: String,
    },
}
