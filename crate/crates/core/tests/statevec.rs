mod common;

use common::*;
use macroent::stategen::gen_haar_random;
use macroent::statevec::{gates, StateVector, C64};
use proptest::prelude::*;

#[test]
fn basis_index_matches_kronecker_product() {
    let zero = [c(1.0, 0.0), c(0.0, 0.0)];
    let one = [c(0.0, 0.0), c(1.0, 0.0)];
    // "10": site 0 in |1⟩, site 1 in |0⟩.
    let dense = kron_product(&[one, zero]);
    let s = StateVector::basis(2, "10").unwrap();
    for (a, b) in s.amplitudes().iter().zip(&dense) {
        assert!((a - b).norm() < 1e-15);
    }
    assert_eq!(s.amplitudes()[1], c(1.0, 0.0));
}

#[test]
fn pauli_x_on_site_zero_flips_lowest_bit() {
    let s = StateVector::zero(2).unwrap().apply_one_qubit(0, &gates::pauli_x()).unwrap();
    assert_eq!(s.amplitudes()[1], c(1.0, 0.0));
}

#[test]
fn one_qubit_gates_match_dense_embedding() {
    let psi = gen_haar_random(3, 17).unwrap();
    for site in 0..3 {
        let u = random_unitary(100 + site as u64);
        let out = psi.apply_one_qubit(site, &u).unwrap();
        let full = embed(&gate_matrix(&u), site, 3);
        let expected = &full * nalgebra::DVector::from_column_slice(psi.amplitudes());
        for (a, b) in out.amplitudes().iter().zip(expected.iter()) {
            assert!((a - b).norm() < 1e-12);
        }
        assert!((out.norm_sqr() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn product_constructor_matches_kronecker() {
    let qubits: Vec<[C64; 2]> = (0..4)
        .map(|i| {
            let th = 0.3 + 0.4 * i as f64;
            [c((th / 2.0).cos(), 0.0), C64::from_polar((th / 2.0).sin(), 0.7 * i as f64)]
        })
        .collect();
    let s = StateVector::product(&qubits).unwrap();
    let dense = kron_product(&qubits);
    for (a, b) in s.amplitudes().iter().zip(&dense) {
        assert!((a - b).norm() < 1e-14);
    }
}

fn unit_axis(theta: f64, phi: f64) -> [f64; 3] {
    [theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gates_preserve_norm(seed in 0u64..10_000, n in 1usize..7, site_pick in 0usize..7) {
        let site = site_pick % n;
        let psi = gen_haar_random(n, seed).unwrap();
        let out = psi.apply_one_qubit(site, &random_unitary(seed ^ 0xabc)).unwrap();
        prop_assert!((out.norm_sqr() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn no_signaling(seed in 0u64..10_000, n in 2usize..7, x_pick in 0usize..7, y_off in 1usize..6,
                    theta in 0.0f64..std::f64::consts::PI, phi in 0.0f64..std::f64::consts::TAU) {
        let x = x_pick % n;
        let y = (x + 1 + y_off % (n - 1)) % n;
        prop_assume!(x != y);
        let psi = gen_haar_random(n, seed).unwrap();
        let before = psi.bloch_vector(y).unwrap();
        let mut after = [0.0; 3];
        for (_, p, post) in psi.measurement_branches(x, unit_axis(theta, phi)).unwrap() {
            if let Some(post) = post {
                let v = post.bloch_vector(y).unwrap();
                for a in 0..3 {
                    after[a] += p * v[a];
                }
            }
        }
        for a in 0..3 {
            prop_assert!((after[a] - before[a]).abs() < 1e-9, "{:?} vs {:?}", after, before);
        }
    }
}
