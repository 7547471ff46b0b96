//! Duality solutions of linear transport with a one-sided Lipschitz velocity:
//! Filippov flow, pushforward of measures, reversible solutions of the
//! backward equation and the checks that tie them to the hard-congestion limit.

mod flow;
mod hcl;
mod measure;
mod representative;
mod reversible;
mod scenarios;
mod velocity;

pub use flow::{filippov_flow, filippov_flow_with_stops, pool_adjacent_violators, FlowMap};
pub use hcl::{
    hcl_duality_check, mollified_sign_distances, space_time_pairing, transport_inequality_defect,
    transport_weak_residual, Condition, HclReport, HclTolerances,
};
pub use measure::{dual_lipschitz_distance, pushforward, Measure1D, ATOM_THRESHOLD};
pub use representative::{universal_representative, JUMP_FACTOR};
pub use reversible::{
    duality_residual, reversible_solve, DualityResidual, MeasureTrajectory, Profile, ReversibleSolution,
};
pub use scenarios::{
    corpus_duality_scenario, frozen_non_solution, sign_flow_scenario, solver_duality, ConstancyCheck,
    CorpusDualityReport, SignFlowReport, WeakDualityReport, DUALITY_K, NON_SOLUTION_THRESHOLD, WEAK_DUALITY_FACTOR,
};
pub use velocity::VelocityField;
