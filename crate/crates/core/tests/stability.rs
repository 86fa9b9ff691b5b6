mod common;

use macroent::stability::{disturbance, disturbance_from, stability_vs_cluster, PairData};
use macroent::correlator::build_vcm;
use macroent::stategen::StateFamily;
use macroent::statevec::StateVector;
use nalgebra::Matrix3;

/// Disturbance for one axis from explicit post-measurement states.
fn brute_lambda(psi: &StateVector, x: usize, y: usize, n: [f64; 3]) -> f64 {
    let v = psi.bloch_vector(y).unwrap();
    let mut m = Matrix3::<f64>::zeros();
    for (_, p, post) in psi.measurement_branches(x, n).unwrap() {
        let Some(post) = post else { continue };
        let w = post.bloch_vector(y).unwrap();
        let d = [w[0] - v[0], w[1] - v[1], w[2] - v[2]];
        for a in 0..3 {
            for b in 0..3 {
                m[(a, b)] += p * d[a] * d[b];
            }
        }
    }
    m.symmetric_eigenvalues().max()
}

/// Max over a 100 × 100 grid in (cos θ, φ): 10^4 axes.
fn brute_grid(psi: &StateVector, x: usize, y: usize) -> f64 {
    let mut best: f64 = 0.0;
    for i in 0..100 {
        let z = -1.0 + (2.0 * i as f64 + 1.0) / 100.0;
        let r = (1.0 - z * z).sqrt();
        for j in 0..100 {
            let phi = std::f64::consts::TAU * j as f64 / 100.0;
            best = best.max(brute_lambda(psi, x, y, [r * phi.cos(), r * phi.sin(), z]));
        }
    }
    best.sqrt()
}

/// Largest generalized eigenvalue of (K Kᵀ, I − v vᵀ).
fn generalized_oracle(psi: &StateVector, x: usize, y: usize) -> f64 {
    let vcm = build_vcm(psi);
    let k = vcm.block(x, y);
    let v = nalgebra::Vector3::from(vcm.bloch(x));
    let b = Matrix3::identity() - v * v.transpose();
    let a = k * k.transpose();
    let chol = b.cholesky().expect("mixed site");
    let l_inv = chol.l().try_inverse().unwrap();
    let c = l_inv * a * l_inv.transpose();
    c.symmetric_eigenvalues().max().max(0.0).sqrt()
}

#[test]
fn w8_far_pair_matches_brute_force_grid() {
    let w = StateFamily::W.generate(8).unwrap();
    let r = disturbance(&w, 0, 7).unwrap();
    let grid = brute_grid(&w, 0, 7);
    assert!(r.value >= grid - 1e-9, "{} < {grid}", r.value);
    assert!(r.value - grid < 1e-3);
    assert!(r.value <= 4.0 / 8.0);
    assert!((r.value - generalized_oracle(&w, 0, 7)).abs() < 1e-8);
}

#[test]
fn refined_axis_matches_generalized_eigenproblem() {
    let families = [
        StateFamily::W,
        StateFamily::Dicke { k: 2 },
        StateFamily::HaarRandom { seed: 5 },
        StateFamily::IsingGround { j: 1.0, h: 0.7 },
    ];
    for family in families {
        let psi = family.generate(6).unwrap();
        for (x, y) in [(0, 1), (0, 3), (2, 5)] {
            let r = disturbance(&psi, x, y).unwrap();
            let exact = generalized_oracle(&psi, x, y);
            assert!((r.value - exact).abs() < 1e-8, "{} ({x},{y}): {} vs {exact}", family.label(), r.value);
            let at_axis = brute_lambda(&psi, x, y, r.argmax_axis).sqrt();
            assert!((at_axis - r.value).abs() < 1e-9);
        }
    }
}

#[test]
fn disturbance_bounds_pair_strength_on_catalog() {
    let families = [
        StateFamily::ProductRandom { seed: 1 },
        StateFamily::Cat,
        StateFamily::W,
        StateFamily::BellPair,
        StateFamily::IsingGround { j: 1.0, h: 3.0 },
        StateFamily::IsingGround { j: 1.0, h: 0.2 },
    ];
    for family in families {
        for n in [4, 7, 10] {
            let psi = family.generate(n).unwrap();
            let vcm = build_vcm(&psi);
            for y in 1..n {
                let s = vcm.pair_strength(0, y);
                let d = disturbance_from(&vcm, 0, y).value;
                assert!(d >= s - 1e-9, "{} N={n} y={y}: {d} < {s}", family.label());
                assert!((0.0..=2.0).contains(&d));
            }
        }
    }
}

#[test]
fn pair_data_is_zero_for_products() {
    let p = StateFamily::ProductRandom { seed: 8 }.generate(4).unwrap();
    let data = PairData::from_vcm(&build_vcm(&p), 1, 3);
    assert!(data.lambda([0.6, 0.0, 0.8]) < 1e-18);
}

#[test]
fn paramagnet_columns_decay_together() {
    let psi = StateFamily::IsingGround { j: 1.0, h: 3.0 }.generate(10).unwrap();
    let rep = stability_vs_cluster(&psi, 0.01).unwrap();
    let mut profile: Vec<(usize, f64, f64)> = (1..=5)
        .map(|d| {
            let row = rep.rows.iter().find(|r| r.x == 0 && r.distance == d).unwrap();
            (d, row.pair_strength, row.disturbance)
        })
        .collect();
    profile.sort_by_key(|p| p.0);
    for w in profile.windows(2) {
        assert!(w[1].1 <= w[0].1 + 1e-12, "{profile:?}");
        assert!(w[1].2 <= w[0].2 + 1e-12, "{profile:?}");
    }
    assert!(rep.violations.is_empty());
}
