use congestio::corpus::velocity_corpus;
use congestio::duality::{filippov_flow, pushforward, Measure1D, VelocityField};
use congestio::GridField;
use proptest::prelude::*;

const L: f64 = 2.0;
const CELLS: usize = 80;
const HORIZON: f64 = 0.5;

fn field(seed: u64) -> VelocityField {
    velocity_corpus(seed, 1, L, CELLS, HORIZON, 6).unwrap().remove(0)
}

/// Signed density `sum c_k sin(k pi x)` on `[-1, 1]`, plus atoms.
fn measure(coeffs: &[f64], atoms: &[(f64, f64)]) -> Measure1D {
    let ac = GridField::from_fn(CELLS, L, |x| {
        if x.abs() >= 1.0 {
            return 0.0;
        }
        coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| c * ((k + 1) as f64 * std::f64::consts::PI * x).sin())
            .sum::<f64>()
            + 0.5
    });
    let mut atoms = atoms.to_vec();
    atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
    atoms.dedup_by(|a, b| a.0 == b.0);
    Measure1D::new(ac, atoms).unwrap()
}

fn transported(mu0: &Measure1D, u: &VelocityField) -> Measure1D {
    let flow = filippov_flow(u, &mu0.flow_seeds(), 0.0, HORIZON).unwrap();
    pushforward(mu0, &flow, flow.times.len() - 1).unwrap()
}

fn atoms_strategy() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-0.9f64..0.9, -0.5f64..0.5), 0..4)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn pushforward_conserves_mass(
        seed in any::<u64>(),
        coeffs in prop::collection::vec(-0.4f64..0.4, 1..5),
        atoms in atoms_strategy(),
    ) {
        let u = field(seed);
        let mu0 = measure(&coeffs, &atoms);
        let mu = transported(&mu0, &u);
        prop_assert!((mu.total_mass() - mu0.total_mass()).abs() <= 1e-10 * mu0.total_variation().max(1.0));
    }

    #[test]
    fn flow_preserves_order(seed in any::<u64>(), mut x0 in prop::collection::vec(-1.5f64..1.5, 2..40)) {
        x0.sort_by(f64::total_cmp);
        let flow = filippov_flow(&field(seed), &x0, 0.0, HORIZON).unwrap();
        for row in &flow.positions {
            prop_assert!(row.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn total_variation_does_not_grow(
        seed in any::<u64>(),
        coeffs in prop::collection::vec(-1.5f64..1.5, 1..5),
        atoms in atoms_strategy(),
    ) {
        // |mu_t| <= (flow)_# |mu_0| for signed data
        let u = field(seed);
        let mu0 = measure(&coeffs, &atoms);
        let mu = transported(&mu0, &u);
        prop_assert!(mu.total_variation() <= mu0.total_variation() * (1.0 + 1e-10) + 1e-12);
        let abs = transported(&mu0.abs(), &u);
        prop_assert!((abs.total_variation() - mu0.total_variation()).abs() <= 1e-10 * mu0.total_variation().max(1.0));
    }
}
