use serde::{Deserialize, Serialize};

/// Per-step scalar diagnostics; one CSV row per step in `COLUMNS` order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsRecord {
    pub step: usize,
    pub t: f64,
    pub dt: f64,
    pub mass_defect: f64,
    pub e_kinetic: f64,
    pub e_dissipated: f64,
    pub e1: f64,
    pub e_boundary: f64,
    pub energy_defect: f64,
    pub rel_energy: f64,
    pub mom_u_l1: f64,
    pub mom_w_l1: f64,
    pub dxpi_l1: f64,
    pub u_min: f64,
    pub u_max: f64,
    pub oslc: f64,
    pub wn_sup: f64,
    pub vn_sup: f64,
    pub rho_min: f64,
    pub rho_min_bound: f64,
    pub rho_max: f64,
    pub pi_l1_local: f64,
    pub dxpi_l1_local: f64,
    pub switching_l1: f64,
    pub entropy_defect: f64,
    pub pi_consistency: f64,
}

pub const COLUMNS: [&str; 26] = [
    "step",
    "t",
    "dt",
    "mass_defect",
    "E_kinetic",
    "E_dissipated",
    "E1",
    "E_boundary",
    "energy_defect",
    "rel_energy",
    "mom_u_L1",
    "mom_w_L1",
    "dxpi_L1",
    "u_min",
    "u_max",
    "oslc",
    "Wn_sup",
    "Vn_sup",
    "rho_min",
    "rho_min_bound",
    "rho_max",
    "pi_L1_local",
    "dxpi_L1_local",
    "switching_L1",
    "entropy_defect",
    "pi_consistency",
];

impl DiagnosticsRecord {
    pub fn values(&self) -> [f64; 25] {
        [
            self.t,
            self.dt,
            self.mass_defect,
            self.e_kinetic,
            self.e_dissipated,
            self.e1,
            self.e_boundary,
            self.energy_defect,
            self.rel_energy,
            self.mom_u_l1,
            self.mom_w_l1,
            self.dxpi_l1,
            self.u_min,
            self.u_max,
            self.oslc,
            self.wn_sup,
            self.vn_sup,
            self.rho_min,
            self.rho_min_bound,
            self.rho_max,
            self.pi_l1_local,
            self.dxpi_l1_local,
            self.switching_l1,
            self.entropy_defect,
            self.pi_consistency,
        ]
    }

    /// Comma-separated row; floats use the shortest round-trip representation.
    pub fn csv_row(&self) -> String {
        let mut row = self.step.to_string();
        for v in self.values() {
            row.push(',');
            row.push_str(&format!("{v:e}"));
        }
        row
    }

    pub fn csv_header() -> String {
        COLUMNS.join(",")
    }

    pub fn is_finite(&self) -> bool {
        self.values().iter().all(|v| v.is_finite())
    }
}
