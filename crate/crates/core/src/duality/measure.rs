use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::GridField;
use crate::testbank::Hat;

use super::flow::FlowMap;

/// Intervals collapsed below this fraction of `h` become atoms; atoms closer
/// than this fraction of `h` merge.
pub const ATOM_THRESHOLD: f64 = 1e-9;

/// Signed measure on `[-L, L]`: cell-averaged density plus finitely many atoms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MeasureJson", into = "MeasureJson")]
pub struct Measure1D {
    pub ac: GridField,
    /// `(location, mass)`, sorted by location with pairwise distinct locations.
    pub atoms: Vec<(f64, f64)>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MeasureJson {
    ac: Vec<f64>,
    h: f64,
    atoms: Vec<[f64; 2]>,
}

impl TryFrom<MeasureJson> for Measure1D {
    type Error = Error;

    fn try_from(j: MeasureJson) -> Result<Self> {
        let ac = GridField::new(j.ac, j.h)?;
        Measure1D::new(ac, j.atoms.into_iter().map(|[x, m]| (x, m)).collect())
    }
}

impl From<Measure1D> for MeasureJson {
    fn from(m: Measure1D) -> Self {
        MeasureJson {
            h: m.ac.h,
            ac: m.ac.values,
            atoms: m.atoms.into_iter().map(|(x, m)| [x, m]).collect(),
        }
    }
}

impl Measure1D {
    /// Sorts the atoms, merges those closer than `ATOM_THRESHOLD h` (mass
    /// added, location mass-weighted when the masses allow it) and drops zero
    /// masses.
    pub fn new(ac: GridField, atoms: Vec<(f64, f64)>) -> Result<Self> {
        let l = ac.half_width();
        if ac.is_empty() {
            return Err(Error::Input("measure grid has no cells".into()));
        }
        for &(x, m) in &atoms {
            if !(x.is_finite() && m.is_finite()) || x.abs() > l * (1.0 + 1e-12) {
                return Err(Error::Input(format!(
                    "atom ({x}, {m}) outside [-{l}, {l}] or not finite"
                )));
            }
        }
        let atoms = merge_atoms(atoms, ATOM_THRESHOLD * ac.h);
        Ok(Self { ac, atoms })
    }

    pub fn zero(cells: usize, half_width: f64) -> Self {
        Self {
            ac: GridField::constant(cells, 2.0 * half_width / cells as f64, 0.0),
            atoms: Vec::new(),
        }
    }

    /// Density one on `[a, b]`, cell averages exact.
    pub fn lebesgue(cells: usize, half_width: f64, a: f64, b: f64) -> Self {
        let mut m = Self::zero(cells, half_width);
        let h = m.ac.h;
        for i in 0..cells {
            let lo = m.ac.face(i).max(a);
            let hi = m.ac.face(i + 1).min(b);
            m.ac.values[i] = (hi - lo).max(0.0) / h;
        }
        m
    }

    pub fn from_density(ac: GridField) -> Self {
        Self { ac, atoms: Vec::new() }
    }

    pub fn half_width(&self) -> f64 {
        self.ac.half_width()
    }

    pub fn cells(&self) -> usize {
        self.ac.len()
    }

    pub fn total_mass(&self) -> f64 {
        self.ac.integral() + self.atoms.iter().map(|a| a.1).sum::<f64>()
    }

    pub fn total_variation(&self) -> f64 {
        self.ac.l1_norm() + self.atoms.iter().map(|a| a.1.abs()).sum::<f64>()
    }

    /// The variation measure `|mu|`.
    pub fn abs(&self) -> Self {
        Self {
            ac: self.ac.map(f64::abs),
            atoms: self.atoms.iter().map(|&(x, m)| (x, m.abs())).collect(),
        }
    }

    /// `int f dmu` with the midpoint rule on the density.
    pub fn pair(&self, f: impl Fn(f64) -> f64) -> f64 {
        let h = self.ac.h;
        let ac: f64 = (0..self.cells())
            .map(|i| self.ac.values[i] * f(self.ac.center(i)) * h)
            .sum();
        ac + self.atoms.iter().map(|&(x, m)| m * f(x)).sum::<f64>()
    }

    /// `int hat dmu`, exact for the piecewise-constant density.
    pub fn pair_hat(&self, hat: &Hat) -> f64 {
        let (s0, s1) = hat.support();
        let range = cell_range(&self.ac, s0, s1);
        let ac: f64 = range
            .map(|i| self.ac.values[i] * hat.integral(self.ac.face(i), self.ac.face(i + 1)))
            .sum();
        ac + self.atoms.iter().map(|&(x, m)| m * hat.value(x)).sum::<f64>()
    }

    /// Mass of the atoms within distance `r` of `x`.
    pub fn atom_mass_near(&self, x: f64, r: f64) -> f64 {
        self.atoms.iter().filter(|a| (a.0 - x).abs() <= r).map(|a| a.1).sum()
    }

    /// Starting points of the flow that transports this measure: the `N+1`
    /// cell faces and the atom locations, merged in nondecreasing order.
    pub fn flow_seeds(&self) -> Vec<f64> {
        self.seed_layout().0
    }

    /// Seeds plus the seed index of every face and of every atom.
    fn seed_layout(&self) -> (Vec<f64>, Vec<usize>, Vec<usize>) {
        let faces = self.ac.faces();
        let mut seeds = Vec::with_capacity(faces.len() + self.atoms.len());
        let mut face_idx = Vec::with_capacity(faces.len());
        let mut atom_idx = Vec::with_capacity(self.atoms.len());
        let (mut i, mut j) = (0, 0);
        while i < faces.len() || j < self.atoms.len() {
            if j == self.atoms.len() || (i < faces.len() && faces[i] <= self.atoms[j].0) {
                face_idx.push(seeds.len());
                seeds.push(faces[i]);
                i += 1;
            } else {
                atom_idx.push(seeds.len());
                seeds.push(self.atoms[j].0);
                j += 1;
            }
        }
        (seeds, face_idx, atom_idx)
    }

    pub fn difference(&self, other: &Self) -> Result<Self> {
        let ac = self.ac.zip_map(&other.ac, |a, b| a - b)?;
        let mut atoms = self.atoms.clone();
        atoms.extend(other.atoms.iter().map(|&(x, m)| (x, -m)));
        Self::new(ac, atoms)
    }
}

fn cell_range(g: &GridField, a: f64, b: f64) -> std::ops::Range<usize> {
    let l = g.half_width();
    let lo = (((a + l) / g.h).floor().max(0.0) as usize).min(g.len());
    let hi = (((b + l) / g.h).ceil().max(0.0) as usize).min(g.len());
    lo..hi.max(lo)
}

fn merge_atoms(mut atoms: Vec<(f64, f64)>, tol: f64) -> Vec<(f64, f64)> {
    atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out: Vec<(f64, f64, f64)> = Vec::with_capacity(atoms.len());
    for (x, m) in atoms {
        match out.last_mut() {
            Some(last) if (x - last.0).abs() <= tol => {
                // location weighted by |m| so cancellation cannot move it away
                let w = last.2 + m.abs();
                if w > 0.0 {
                    last.0 = (last.0 * last.2 + x * m.abs()) / w;
                }
                last.1 += m;
                last.2 = w;
            }
            _ => out.push((x, m, m.abs())),
        }
    }
    out.into_iter().filter(|a| a.1 != 0.0).map(|a| (a.0, a.1)).collect()
}

/// Image of `mu0` under the flow at recorded index `k`. The flow must have
/// been started from `mu0.flow_seeds()`. Each cell's mass is spread uniformly
/// over the image of the cell; images narrower than `ATOM_THRESHOLD h` become
/// atoms. Mass carried outside `[-L, L]` is dropped.
pub fn pushforward(mu0: &Measure1D, flow: &FlowMap, k: usize) -> Result<Measure1D> {
    let (seeds, face_idx, atom_idx) = mu0.seed_layout();
    if flow.x0.len() != seeds.len() || flow.x0.iter().zip(&seeds).any(|(a, b)| a != b) {
        return Err(Error::Input("flow was not started from the measure's seeds".into()));
    }
    let x = flow
        .positions
        .get(k)
        .ok_or_else(|| Error::Input(format!("flow has no time index {k}")))?;
    let n = mu0.cells();
    let h = mu0.ac.h;
    let l = mu0.half_width();
    let mut out = Measure1D::zero(n, l);
    let mut atoms = Vec::new();
    for i in 0..n {
        let mass = mu0.ac.values[i] * h;
        if mass == 0.0 {
            continue;
        }
        let (a, b) = (x[face_idx[i]], x[face_idx[i + 1]]);
        if b - a < ATOM_THRESHOLD * h {
            let c = 0.5 * (a + b);
            if c.abs() <= l {
                atoms.push((c, mass));
            }
            continue;
        }
        let density = mass / (b - a);
        for j in cell_range(&out.ac, a, b) {
            let overlap = out.ac.face(j + 1).min(b) - out.ac.face(j).max(a);
            if overlap > 0.0 {
                out.ac.values[j] += density * overlap / h;
            }
        }
    }
    for (j, &(_, m)) in mu0.atoms.iter().enumerate() {
        let y = x[atom_idx[j]];
        if y.abs() <= l {
            atoms.push((y, m));
        }
    }
    out.atoms = merge_atoms(atoms, ATOM_THRESHOLD * h);
    Ok(out)
}

/// `max_hat |int hat d(a - b)|` over a bank of 1-Lipschitz hats.
pub fn dual_lipschitz_distance(a: &Measure1D, b: &Measure1D, bank: &[Hat]) -> Result<f64> {
    let d = a.difference(b)?;
    Ok(bank.iter().map(|hat| d.pair_hat(hat).abs()).fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::duality::{filippov_flow, VelocityField};

    fn sign_field() -> VelocityField {
        VelocityField::steady(VelocityField::lattice(2.0, 400), 0.0, |x| {
            if x == 0.0 {
                0.0
            } else {
                -x.signum()
            }
        })
        .unwrap()
    }

    #[test]
    fn json_layout() {
        let m = Measure1D::new(GridField::constant(2, 0.5, 1.0), vec![(0.1, 2.0)]).unwrap();
        let j = serde_json::to_value(&m).unwrap();
        assert_eq!(
            j,
            serde_json::json!({"ac": [1.0, 1.0], "h": 0.5, "atoms": [[0.1, 2.0]]})
        );
        let back: Measure1D = serde_json::from_value(j).unwrap();
        assert_eq!(back, m);
        let bad = serde_json::json!({"ac": [1.0], "h": 0.5, "atoms": [], "extra": 1});
        assert!(serde_json::from_value::<Measure1D>(bad).is_err());
    }

    #[test]
    fn close_atoms_merge() {
        let m = Measure1D::new(
            GridField::constant(4, 0.5, 0.0),
            vec![(0.2, 1.0), (0.2 + 1e-12, 3.0), (-0.3, 1.0)],
        )
        .unwrap();
        assert_eq!(m.atoms.len(), 2);
        assert!((m.atoms[1].1 - 4.0).abs() < 1e-15);
    }

    #[test]
    fn atom_outside_domain_is_rejected() {
        assert!(Measure1D::new(GridField::constant(4, 0.5, 0.0), vec![(1.5, 1.0)]).is_err());
    }

    #[test]
    fn lebesgue_mass_is_exact() {
        let m = Measure1D::lebesgue(400, 2.0, -1.0, 1.0);
        assert!((m.total_mass() - 2.0).abs() < 1e-13);
    }

    #[test]
    fn dirac_translates() {
        let mu = Measure1D::new(GridField::constant(100, 0.04, 0.0), vec![(-0.5, 0.7)]).unwrap();
        let u = VelocityField::steady(VelocityField::lattice(2.0, 100), 0.0, |_| 0.5).unwrap();
        let flow = filippov_flow(&u, &mu.flow_seeds(), 0.0, 1.0).unwrap();
        let out = pushforward(&mu, &flow, flow.times.len() - 1).unwrap();
        assert_eq!(out.atoms.len(), 1);
        assert!((out.atoms[0].0 - 0.0).abs() < 1e-14 && out.atoms[0].1 == 0.7);
    }

    #[test]
    fn identity_at_time_zero() {
        let mu = Measure1D::lebesgue(400, 2.0, -1.0, 1.0);
        let flow = filippov_flow(&sign_field(), &mu.flow_seeds(), 0.0, 0.5).unwrap();
        assert_eq!(pushforward(&mu, &flow, 0).unwrap(), mu);
    }

    #[test]
    fn sign_field_concentrates_half_the_mass() {
        let mu = Measure1D::lebesgue(400, 2.0, -1.0, 1.0);
        let flow = filippov_flow(&sign_field(), &mu.flow_seeds(), 0.0, 0.5).unwrap();
        let out = pushforward(&mu, &flow, flow.times.len() - 1).unwrap();
        let h = mu.ac.h;
        assert!((out.atom_mass_near(0.0, h) - 1.0).abs() <= 0.02, "{:?}", out.atoms);
        assert!((out.total_mass() - 2.0).abs() <= 1e-10);
        // uniform density one on [-0.5, 0.5] away from the atom
        for i in out.ac.window(-0.45, 0.45) {
            if out.ac.center(i).abs() > 2.0 * h {
                assert!((out.ac.values[i] - 1.0).abs() < 1e-9, "{}", out.ac.values[i]);
            }
        }
        assert!(out.ac.values[out.ac.window(0.6, 2.0)].iter().all(|&v| v == 0.0));
    }

    #[test]
    fn rejects_foreign_flow() {
        let mu = Measure1D::lebesgue(40, 2.0, -1.0, 1.0);
        let flow = filippov_flow(&sign_field(), &[0.0, 1.0], 0.0, 0.5).unwrap();
        assert!(matches!(pushforward(&mu, &flow, 0), Err(Error::Input(_))));
    }

    #[test]
    fn hat_pairing_is_exact_for_lebesgue() {
        let mu = Measure1D::lebesgue(64, 2.0, -1.0, 1.0);
        let hat = Hat {
            center: 0.9,
            half_width: 0.3,
        };
        // hat restricted to [-1, 1]: full area 0.09 minus the part beyond x = 1
        let expected = 0.09 - 0.5 * 0.2 * 0.2;
        assert!((mu.pair_hat(&hat) - expected).abs() < 1e-15);
    }
}
