mod common;

use common::*;
use macroent::eigen::LanczosConfig;
use macroent::stategen::{gen_dicke, gen_ising_ground, ising_ground_with, IsingRing};

#[test]
fn lanczos_ground_state_matches_dense_diagonalization() {
    let (n, j, h) = (8, 1.0, 0.2);
    let (psi, energy) = ising_ground_with(n, j, h, &LanczosConfig::default()).unwrap();
    let (e0, v0) = dense_min_eigen(dense_ising(n, j, h));
    assert!((energy - e0).abs() < 1e-9, "{energy} vs {e0}");
    let overlap: f64 = psi.amplitudes().iter().zip(&v0).map(|(a, b)| a.re * b).sum();
    assert!((overlap.abs() - 1.0).abs() < 1e-8);
    assert!((IsingRing::new(n, j, h).unwrap().energy(&psi).unwrap() - e0).abs() < 1e-9);
}

#[test]
fn paramagnetic_ground_state_matches_dense() {
    let (e0, _) = dense_min_eigen(dense_ising(10, 1.0, 3.0));
    let psi = gen_ising_ground(10, 1.0, 3.0).unwrap();
    let e = IsingRing::new(10, 1.0, 3.0).unwrap().energy(&psi).unwrap();
    assert!((e - e0).abs() < 1e-9);
}

#[test]
fn dicke_amplitudes_are_uniform_on_weight_k() {
    let d = gen_dicke(5, 2).unwrap();
    let a = (1.0f64 / 10.0).sqrt();
    for (i, amp) in d.amplitudes().iter().enumerate() {
        let expected = if i.count_ones() == 2 { a } else { 0.0 };
        assert!((amp.re - expected).abs() < 1e-14 && amp.im == 0.0);
    }
}
