use macroent::scaling::{fit_power_law, omega_range, sweep, Quantity, SweepConfig};
use macroent::stategen::StateFamily;

#[test]
fn paramagnet_omega_is_size_independent() {
    let family = StateFamily::IsingGround { j: 1.0, h: 3.0 };
    let omegas: Vec<usize> = [8, 10, 12]
        .iter()
        .map(|&n| omega_range(&family.generate(n).unwrap(), 0.05).unwrap())
        .collect();
    assert!(omegas[0] < 8, "{omegas:?}");
    assert!(omegas.iter().all(|&o| o == omegas[0]), "{omegas:?}");
}

#[test]
fn omega_is_monotone_in_epsilon() {
    for family in [StateFamily::IsingGround { j: 1.0, h: 1.5 }, StateFamily::W, StateFamily::HaarRandom { seed: 2 }] {
        let psi = family.generate(8).unwrap();
        let mut prev = usize::MAX;
        for eps in [1e-4, 1e-3, 1e-2, 0.05, 0.1, 0.3, 0.9] {
            let o = omega_range(&psi, eps).unwrap();
            assert!(o <= prev, "{}: eps {eps}", family.label());
            prev = o;
        }
    }
}

#[test]
fn w_sweep_has_unit_slope() {
    let s = sweep(&StateFamily::W, Quantity::MaxFluctuation, &[4, 8, 12], &SweepConfig::default()).unwrap();
    let v = s.values();
    let slope_a = (v[1] - v[0]) / 4.0;
    let slope_b = (v[2] - v[1]) / 4.0;
    assert!((slope_a - slope_b).abs() < 1e-8, "{v:?}");
}

#[test]
fn sweeps_are_reproducible_and_parallel_safe() {
    let family = StateFamily::ProductRandom { seed: 4 };
    let cfg = SweepConfig { seed: 99, method: macroent::Method::Both, ..Default::default() };
    let a = sweep(&family, Quantity::MaxFluctuation, &[3, 5, 7, 9], &cfg).unwrap();
    let b = sweep(&family, Quantity::MaxFluctuation, &[3, 5, 7, 9], &cfg).unwrap();
    assert_eq!(a, b);
}

#[test]
fn power_law_with_noise_free_prefactor() {
    let pts: Vec<(usize, f64)> = [5, 7, 9, 11, 13].iter().map(|&n| (n, 0.3 * (n as f64).powf(1.37))).collect();
    let fit = fit_power_law(&pts).unwrap();
    assert!((fit.exponent - 1.37).abs() < 1e-10);
    assert!((fit.prefactor - 0.3).abs() < 1e-10);
}
