mod common;

use common::*;
use macroent::correlator::{build_vcm, max_fluctuation, max_fluctuation_from, mermin_value, Method, OracleConfig};
use macroent::stategen::{gen_haar_random, StateFamily};
use macroent::statevec::{gates, StateVector};

fn catalog() -> Vec<StateFamily> {
    vec![
        StateFamily::ProductRandom { seed: 3 },
        StateFamily::PlusAll,
        StateFamily::Cat,
        StateFamily::W,
        StateFamily::BellPair,
        StateFamily::Dicke { k: 2 },
        StateFamily::IsingGround { j: 1.0, h: 0.2 },
        StateFamily::IsingGround { j: 1.0, h: 3.0 },
        StateFamily::HaarRandom { seed: 9 },
    ]
}

#[test]
fn vcm_matches_dense_oracle_for_catalog() {
    for family in catalog() {
        for n in family.min_qubits().max(2)..=4 {
            let psi = family.generate(n).unwrap();
            let vcm = build_vcm(&psi);
            let dense = dense_vcm(psi.amplitudes(), n);
            let diff = (vcm.matrix() - &dense).abs().max();
            assert!(diff < 1e-10, "{} N={n}: {diff}", family.label());
            assert!(vcm.eigenvalues()[0] > -1e-8);
        }
    }
}

#[test]
fn w3_covariance_entries() {
    let w = StateFamily::W.generate(3).unwrap();
    let v = build_vcm(&w);
    // ⟨σz⟩ = 1/3 on each site.
    assert!((v.entry(0, 2, 0, 2) - 8.0 / 9.0).abs() < 1e-12);
    assert!((v.entry(0, 0, 0, 0) - 1.0).abs() < 1e-12);
    assert!((v.entry(0, 2, 1, 2) + 4.0 / 9.0).abs() < 1e-12);
    assert!((v.entry(0, 0, 1, 0) - 2.0 / 3.0).abs() < 1e-12);
    assert!((v.entry(0, 1, 1, 1) - 2.0 / 3.0).abs() < 1e-12);
    assert!(v.entry(0, 0, 1, 1).abs() < 1e-12);
}

#[test]
fn relaxed_bounds_oracle_on_random_states() {
    for seed in 0..200u64 {
        let n = 2 + (seed % 5) as usize;
        let psi = gen_haar_random(n, seed).unwrap();
        let vcm = build_vcm(&psi);
        let cfg = OracleConfig { seed, ..Default::default() };
        let r = max_fluctuation_from(&vcm, Method::Both, &cfg);
        let oracle = r.oracle_max.unwrap();
        assert!(r.relaxed_max >= oracle - 1e-9, "seed {seed}: {} < {oracle}", r.relaxed_max);
        for axis in [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]] {
            assert!(oracle >= vcm.uniform_variance(axis) - 1e-9);
        }
        assert!(r.relaxed_max <= (n * n) as f64 + 1e-9);
    }
}

#[test]
fn oracle_is_exact_for_cat() {
    for n in [3, 5, 8] {
        let r = max_fluctuation(&StateFamily::Cat.generate(n).unwrap(), Method::Oracle).unwrap();
        assert!((r.oracle_max.unwrap() - (n * n) as f64).abs() < 1e-8);
    }
}

#[test]
fn e_max_is_local_unitary_invariant() {
    let psi = gen_haar_random(5, 44).unwrap();
    let mut rotated = psi.clone();
    for site in 0..5 {
        rotated.apply_one_qubit_in_place(site, &random_unitary(site as u64 + 7)).unwrap();
    }
    let a = build_vcm(&psi).top_eigenpair().0;
    let b = build_vcm(&rotated).top_eigenpair().0;
    assert!((a - b).abs() < 1e-9);
}

#[test]
fn mermin_for_cat_and_product() {
    for (n, ratio) in [(3, 2.0), (5, 4.0), (7, 8.0)] {
        let m = mermin_value(&StateFamily::Cat.generate(n).unwrap()).unwrap();
        assert!((m.ratio - ratio).abs() < 1e-8);
    }
    let mut plus = StateVector::zero(3).unwrap();
    plus.apply_all_in_place(&gates::hadamard()).unwrap();
    let m = mermin_value(&plus).unwrap();
    assert!(m.value.abs() <= m.lhv_bound + 1e-12);
}
