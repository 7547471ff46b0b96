use crate::constitutive::viscosity_at;
use crate::error::Result;
use crate::params::Params;
use crate::solver::{validate_initial, AdmissibilityReport, FluidState, StepReport};

use super::{
    local_density_cap, momentum_l1, oslc_sup, relative_energy, switching_residual, DiagnosticsRecord,
    EntropyAccumulator, EntropyId, MaxPrincipleBaseline, PiCompanion,
};

/// Accumulates the time-integrated diagnostics of a run and produces one
/// `DiagnosticsRecord` per step.
#[derive(Debug, Clone)]
pub struct DiagnosticsTracker {
    params: Params,
    report: AdmissibilityReport,
    baseline: MaxPrincipleBaseline,
    e1: f64,
    mass0: f64,
    mass_boundary: f64,
    e_boundary: f64,
    e_dissipated: f64,
    worst_energy: f64,
    entropy: Vec<EntropyAccumulator>,
    companion: PiCompanion,
}

impl DiagnosticsTracker {
    pub fn new(initial: &FluidState, params: &Params) -> Result<Self> {
        let report = validate_initial(initial, params)?;
        let baseline = MaxPrincipleBaseline::new(initial, &report, params.gamma)?;
        let window = params.observation_window();
        Ok(Self {
            params: params.clone(),
            baseline,
            e1: kinetic(initial),
            mass0: excess_mass(initial, params.rho_bar),
            mass_boundary: 0.0,
            e_boundary: 0.0,
            e_dissipated: 0.0,
            worst_energy: 0.0,
            entropy: EntropyId::ALL
                .iter()
                .map(|&id| EntropyAccumulator::new(id, initial, params.gamma, window, params.horizon))
                .collect(),
            companion: PiCompanion::new(initial, params.gamma, params.rho_bar, window),
            report,
        })
    }

    pub fn admissibility(&self) -> &AdmissibilityReport {
        &self.report
    }

    pub fn baseline(&self) -> &MaxPrincipleBaseline {
        &self.baseline
    }

    pub fn e1(&self) -> f64 {
        self.e1
    }

    pub fn entropy_defect(&self, id: EntropyId) -> f64 {
        self.entropy
            .iter()
            .find(|a| a.id() == id)
            .map(|a| a.defect())
            .unwrap_or(0.0)
    }

    pub fn pi_consistency(&self) -> f64 {
        self.companion.defect()
    }

    /// Folds one step into the running integrals and returns its record.
    pub fn advance(&mut self, step: usize, old: &FluidState, report: &StepReport) -> Result<DiagnosticsRecord> {
        let new = &report.state;
        let dt = new.t - old.t;
        self.e_dissipated += 2.0 * dt * face_dissipation(new, &self.params);
        self.mass_boundary += report.mass_influx;
        self.e_boundary += report.energy_influx;
        for acc in &mut self.entropy {
            acc.accumulate(old, new);
        }
        self.companion.advance(old, new);
        self.record(step, dt, new)
    }

    pub fn record(&mut self, step: usize, dt: f64, state: &FluidState) -> Result<DiagnosticsRecord> {
        let p = &self.params;
        let g = p.gamma;
        let e_kinetic = kinetic(state);
        let energy_defect = (e_kinetic + self.e_dissipated - self.e1 - self.e_boundary).abs() / self.e1.max(1e-14);
        self.worst_energy = self.worst_energy.max(energy_defect);
        let mom = momentum_l1(state, p)?;
        let cap = local_density_cap(state, p);
        Ok(DiagnosticsRecord {
            step,
            t: state.t,
            dt,
            mass_defect: excess_mass(state, p.rho_bar) - self.mass0 - self.mass_boundary,
            e_kinetic,
            e_dissipated: self.e_dissipated,
            e1: self.e1,
            e_boundary: self.e_boundary,
            energy_defect,
            rel_energy: relative_energy(state, p),
            mom_u_l1: mom.mom_u,
            mom_w_l1: mom.mom_w,
            dxpi_l1: mom.dxpi,
            u_min: state.u.min(),
            u_max: state.u.max(),
            oslc: oslc_sup(state),
            wn_sup: state.transported_potential(g)?.max(),
            vn_sup: state.active_potential(g)?.max(),
            rho_min: state.rho.min(),
            rho_min_bound: self.baseline.density_floor(state.t),
            rho_max: state.rho.max(),
            pi_l1_local: cap.pi_l1,
            dxpi_l1_local: cap.dxpi_l1,
            switching_l1: switching_residual(state, p),
            entropy_defect: self.entropy.iter().map(|a| a.defect()).fold(0.0, f64::max),
            pi_consistency: self.companion.defect(),
        })
    }
}

fn kinetic(state: &FluidState) -> f64 {
    state
        .rho
        .values
        .iter()
        .zip(&state.u.values)
        .map(|(r, u)| r * u * u * state.h())
        .sum()
}

fn excess_mass(state: &FluidState, rho_bar: f64) -> f64 {
    state.rho.values.iter().map(|r| (r - rho_bar) * state.h()).sum()
}

/// `sum_f lambda_f ((u_f - u_{f-1}) / h)^2 h` over all faces, ghosts included,
/// with the face viscosity of the implicit solve.
fn face_dissipation(new: &FluidState, params: &Params) -> f64 {
    let n = new.cells();
    let h = new.h();
    let g = params.gamma;
    let lam_ghost = viscosity_at(params.rho_bar, g);
    let lam = |i: usize| viscosity_at(new.rho.values[i], g);
    let u = &new.u.values;
    let [ul, ur] = new.far_u;
    (0..=n)
        .map(|f| {
            let (lam_l, u_l) = if f == 0 {
                (lam_ghost, ul)
            } else {
                (lam(f - 1), u[f - 1])
            };
            let (lam_r, u_r) = if f == n { (lam_ghost, ur) } else { (lam(f), u[f]) };
            let grad = (u_r - u_l) / h;
            0.5 * (lam_l + lam_r) * grad * grad * h
        })
        .sum()
}
