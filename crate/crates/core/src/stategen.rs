//! Named state families, each parameterized by the qubit count so that
//! scaling sweeps can iterate over `N`.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::eigen::{lowest_eigenpair, LanczosConfig, SymmetricOperator};
use crate::error::{Error, Result};
use crate::statevec::{StateVector, C64};

/// Largest ring handed to the Lanczos ground-state solver.
pub const ISING_MAX_QUBITS: usize = 16;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum StateFamily {
    ProductRandom { seed: u64 },
    PlusAll,
    Cat,
    W,
    BellPair,
    Dicke { k: usize },
    IsingGround { j: f64, h: f64 },
    HaarRandom { seed: u64 },
}

impl StateFamily {
    pub fn name(&self) -> &'static str {
        match self {
            StateFamily::ProductRandom { .. } => "product_random",
            StateFamily::PlusAll => "plus_all",
            StateFamily::Cat => "cat",
            StateFamily::W => "w",
            StateFamily::BellPair => "bell_pair",
            StateFamily::Dicke { .. } => "dicke",
            StateFamily::IsingGround { .. } => "ising_ground",
            StateFamily::HaarRandom { .. } => "haar_random",
        }
    }

    /// Name plus parameters, e.g. `ising_ground(j=1,h=0.2)`.
    pub fn label(&self) -> String {
        match self {
            StateFamily::ProductRandom { seed } | StateFamily::HaarRandom { seed } => {
                format!("{}(seed={seed})", self.name())
            }
            StateFamily::Dicke { k } => format!("dicke(k={k})"),
            StateFamily::IsingGround { j, h } => format!("ising_ground(j={j},h={h})"),
            _ => self.name().to_string(),
        }
    }

    /// Smallest `N` the family is defined for.
    pub fn min_qubits(&self) -> usize {
        match self {
            StateFamily::BellPair => 2,
            StateFamily::Dicke { k } => (*k).max(1),
            _ => 1,
        }
    }

    pub fn generate(&self, n: usize) -> Result<StateVector> {
        match self {
            StateFamily::ProductRandom { seed } => gen_product_random(n, *seed),
            StateFamily::PlusAll => gen_plus_all(n),
            StateFamily::Cat => gen_cat(n),
            StateFamily::W => gen_w(n),
            StateFamily::BellPair => gen_bell_pair(n),
            StateFamily::Dicke { k } => gen_dicke(n, *k),
            StateFamily::IsingGround { j, h } => gen_ising_ground(n, *j, *h),
            StateFamily::HaarRandom { seed } => gen_haar_random(n, *seed),
        }
    }
}

fn check_n(n: usize, min: usize) -> Result<()> {
    if n < min {
        return Err(Error::InvalidArgument(format!("need N ≥ {min}, got {n}")));
    }
    Ok(())
}

/// `(|0…0⟩ + |1…1⟩)/√2`.
pub fn gen_cat(n: usize) -> Result<StateVector> {
    check_n(n, 1)?;
    let mut s = StateVector::zero(n)?.into_amplitudes();
    let last = s.len() - 1;
    s[0] = C64::new(FRAC_1_SQRT_2, 0.0);
    s[last] = C64::new(FRAC_1_SQRT_2, 0.0);
    StateVector::from_amplitudes(s)
}

/// Uniform superposition of the `N` single-excitation basis states.
pub fn gen_w(n: usize) -> Result<StateVector> {
    gen_dicke(n, 1)
}

/// `(|10…0⟩ + |0…01⟩)/√2`: sites 0 and N−1 share a Bell pair, all other sites are `|0⟩`.
pub fn gen_bell_pair(n: usize) -> Result<StateVector> {
    check_n(n, 2)?;
    let mut s = StateVector::zero(n)?.into_amplitudes();
    s[0] = C64::new(0.0, 0.0);
    s[1] = C64::new(FRAC_1_SQRT_2, 0.0);
    s[1 << (n - 1)] = C64::new(FRAC_1_SQRT_2, 0.0);
    StateVector::from_amplitudes(s)
}

/// Uniform superposition over all weight-`k` bitstrings.
pub fn gen_dicke(n: usize, k: usize) -> Result<StateVector> {
    check_n(n, 1)?;
    if k > n {
        return Err(Error::InvalidArgument(format!("Dicke weight {k} exceeds N = {n}")));
    }
    let mut s = StateVector::zero(n)?.into_amplitudes();
    for (i, a) in s.iter_mut().enumerate() {
        *a = if i.count_ones() as usize == k {
            C64::new(1.0, 0.0)
        } else {
            C64::new(0.0, 0.0)
        };
    }
    StateVector::from_unnormalized(s)
}

/// `⊗|+⟩`.
pub fn gen_plus_all(n: usize) -> Result<StateVector> {
    check_n(n, 1)?;
    let h = C64::new(FRAC_1_SQRT_2, 0.0);
    StateVector::product(&vec![[h, h]; n])
}

/// Product of independent qubits uniformly distributed on the Bloch sphere.
///
/// Site `x` consumes the `x`-th pair of draws from the seeded stream, so the
/// state at `N` is the state at `N − 1` with one more qubit appended.
pub fn gen_product_random(n: usize, seed: u64) -> Result<StateVector> {
    check_n(n, 1)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let qubits: Vec<[C64; 2]> = (0..n)
        .map(|_| {
            let cos_theta: f64 = rng.random_range(-1.0..=1.0);
            let phi: f64 = rng.random_range(0.0..2.0 * PI);
            let theta = cos_theta.acos();
            [
                C64::new((theta / 2.0).cos(), 0.0),
                C64::from_polar((theta / 2.0).sin(), phi),
            ]
        })
        .collect();
    StateVector::product(&qubits)
}

/// Normalized vector of i.i.d. complex Gaussian amplitudes.
pub fn gen_haar_random(n: usize, seed: u64) -> Result<StateVector> {
    check_n(n, 1)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim = StateVector::zero(n)?.dim();
    let amps: Vec<C64> = (0..dim)
        .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    StateVector::from_unnormalized(amps)
}

/// Transverse-field Ising Hamiltonian `H = −J Σ σ_z(x)σ_z(x+1) − h Σ σ_x(x)`.
///
/// Bonds close into a ring for `N ≥ 3`; `N = 2` has a single bond.
#[derive(Clone, Debug)]
pub struct IsingRing {
    n: usize,
    j: f64,
    h: f64,
    diag: Vec<f64>,
}

impl IsingRing {
    pub fn new(n: usize, j: f64, h: f64) -> Result<Self> {
        check_n(n, 1)?;
        if n > ISING_MAX_QUBITS {
            return Err(Error::InvalidArgument(format!(
                "Ising ground state limited to N ≤ {ISING_MAX_QUBITS}, got {n}"
            )));
        }
        if !(j.is_finite() && h.is_finite()) {
            return Err(Error::InvalidArgument("non-finite Ising couplings".into()));
        }
        let bonds = Self::bonds(n);
        let diag = (0..1usize << n)
            .map(|i| {
                -j * bonds
                    .iter()
                    .map(|&(a, b)| if ((i >> a) ^ (i >> b)) & 1 == 0 { 1.0 } else { -1.0 })
                    .sum::<f64>()
            })
            .collect();
        Ok(IsingRing { n, j, h, diag })
    }

    pub fn bonds(n: usize) -> Vec<(usize, usize)> {
        match n {
            1 => vec![],
            2 => vec![(0, 1)],
            _ => (0..n).map(|x| (x, (x + 1) % n)).collect(),
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn couplings(&self) -> (f64, f64) {
        (self.j, self.h)
    }

    /// `⟨ψ|H|ψ⟩`.
    pub fn energy(&self, state: &StateVector) -> Result<f64> {
        if state.n_qubits() != self.n {
            return Err(Error::SizeMismatch(state.n_qubits(), self.n));
        }
        let psi = state.amplitudes();
        let mut e = 0.0;
        for (i, a) in psi.iter().enumerate() {
            let mut hpsi = a * self.diag[i];
            for x in 0..self.n {
                hpsi -= psi[i ^ (1 << x)] * self.h;
            }
            e += (a.conj() * hpsi).re;
        }
        Ok(e)
    }
}

impl SymmetricOperator for IsingRing {
    fn dim(&self) -> usize {
        1 << self.n
    }

    fn apply(&self, x: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            let mut acc = self.diag[i] * x[i];
            for s in 0..self.n {
                acc -= self.h * x[i ^ (1 << s)];
            }
            *o = acc;
        }
    }

    /// Parity `⊗σ_x` commutes with `H`; the ground state is even.
    fn restrict(&self, v: &mut [f64]) {
        let all = v.len() - 1;
        for i in 0..v.len() {
            let j = i ^ all;
            if i < j {
                let m = 0.5 * (v[i] + v[j]);
                v[i] = m;
                v[j] = m;
            }
        }
    }
}

/// Symmetric (parity-even) ground state of the transverse-field Ising ring.
pub fn gen_ising_ground(n: usize, j: f64, h: f64) -> Result<StateVector> {
    ising_ground_with(n, j, h, &LanczosConfig::default()).map(|(s, _)| s)
}

/// Ground state and energy with an explicit solver configuration.
pub fn ising_ground_with(
    n: usize,
    j: f64,
    h: f64,
    config: &LanczosConfig,
) -> Result<(StateVector, f64)> {
    if j <= 0.0 || h <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "Ising couplings must be positive (J = {j}, h = {h})"
        )));
    }
    let op = IsingRing::new(n, j, h)?;
    // The uniform vector overlaps the positive (Perron-Frobenius) ground state.
    let start = vec![1.0; op.dim()];
    let pair = lowest_eigenpair(&op, &start, config)?;
    let sign = if pair.vector.iter().sum::<f64>() < 0.0 { -1.0 } else { 1.0 };
    let amps: Vec<C64> = pair.vector.iter().map(|v| C64::new(sign * v, 0.0)).collect();
    Ok((StateVector::from_unnormalized(amps)?, pair.value))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::statevec::{fidelity, SiteOperator};

    #[test]
    fn cat_examples() {
        let c1 = gen_cat(1).unwrap();
        assert!((c1.amplitudes()[0].re - FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((c1.amplitudes()[1].re - FRAC_1_SQRT_2).abs() < 1e-15);
        let c4 = gen_cat(4).unwrap();
        let nz: Vec<usize> = (0..16).filter(|&i| c4.amplitudes()[i].norm() > 0.0).collect();
        assert_eq!(nz, vec![0, 15]);
    }

    #[test]
    fn w_examples() {
        let w1 = gen_w(1).unwrap();
        assert_eq!(w1.amplitudes()[1], C64::new(1.0, 0.0));
        let w3 = gen_w(3).unwrap();
        let nz: Vec<usize> = (0..8).filter(|&i| w3.amplitudes()[i].norm() > 0.0).collect();
        assert_eq!(nz, vec![1, 2, 4]);
        for i in nz {
            assert!((w3.amplitudes()[i].re - 1.0 / 3f64.sqrt()).abs() < 1e-15);
        }
    }

    #[test]
    fn bell_pair_examples() {
        let b2 = gen_bell_pair(2).unwrap();
        let expected = StateVector::from_unnormalized(vec![
            C64::new(0.0, 0.0),
            C64::new(1.0, 0.0),
            C64::new(1.0, 0.0),
            C64::new(0.0, 0.0),
        ])
        .unwrap();
        assert!((fidelity(&b2, &expected).unwrap() - 1.0).abs() < 1e-15);
        let b3 = gen_bell_pair(3).unwrap();
        let i100 = StateVector::basis(3, "100").unwrap();
        let i001 = StateVector::basis(3, "001").unwrap();
        assert!((fidelity(&b3, &i100).unwrap() - 0.5).abs() < 1e-15);
        assert!((fidelity(&b3, &i001).unwrap() - 0.5).abs() < 1e-15);
        assert!((b3.norm_sqr() - 1.0).abs() < 1e-15);
        assert!(gen_bell_pair(1).is_err());
    }

    #[test]
    fn dicke_one_is_w() {
        assert_eq!(gen_dicke(5, 1).unwrap(), gen_w(5).unwrap());
        assert!(gen_dicke(3, 4).is_err());
    }

    #[test]
    fn random_families_are_deterministic() {
        assert_eq!(gen_haar_random(5, 11).unwrap(), gen_haar_random(5, 11).unwrap());
        assert_ne!(gen_haar_random(5, 11).unwrap(), gen_haar_random(5, 12).unwrap());
        assert!((gen_haar_random(6, 1).unwrap().norm_sqr() - 1.0).abs() < 1e-12);
        assert_eq!(gen_product_random(4, 2).unwrap(), gen_product_random(4, 2).unwrap());
    }

    #[test]
    fn product_random_is_prefix_consistent() {
        let small = gen_product_random(3, 9).unwrap();
        let big = gen_product_random(4, 9).unwrap();
        for x in 0..3 {
            let a = small.bloch_vector(x).unwrap();
            let b = big.bloch_vector(x).unwrap();
            for k in 0..3 {
                assert!((a[k] - b[k]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn product_random_has_no_cross_covariance() {
        let s = gen_product_random(3, 5).unwrap();
        for x in 0..3 {
            for y in 0..3 {
                if x == y {
                    continue;
                }
                for a in 0..3 {
                    for b in 0..3 {
                        let c = s
                            .covar_pair_sym(x, &SiteOperator::from_axis(a), y, &SiteOperator::from_axis(b))
                            .unwrap();
                        assert!(c.abs() < 1e-10);
                    }
                }
            }
        }
    }

    #[test]
    fn ising_paramagnetic_limit() {
        let g = gen_ising_ground(4, 1.0, 50.0).unwrap();
        assert!(fidelity(&g, &gen_plus_all(4).unwrap()).unwrap() > 0.999);
    }

    #[test]
    fn ising_degenerate_limit_is_cat() {
        let g = gen_ising_ground(4, 1.0, 0.01).unwrap();
        assert!(fidelity(&g, &gen_cat(4).unwrap()).unwrap() > 0.99);
    }

    #[test]
    fn ising_rejects_bad_parameters() {
        assert!(gen_ising_ground(4, -1.0, 1.0).is_err());
        assert!(gen_ising_ground(4, 1.0, 0.0).is_err());
        assert!(gen_ising_ground(ISING_MAX_QUBITS + 1, 1.0, 1.0).is_err());
    }

    #[test]
    fn ising_ground_is_symmetric_and_positive() {
        let g = gen_ising_ground(8, 1.0, 0.5).unwrap();
        let mz: f64 = (0..8).map(|x| g.expect_site(x, &SiteOperator::Z).unwrap()).sum();
        assert!(mz.abs() < 1e-8);
        assert!(g.amplitudes().iter().all(|a| a.re > -1e-12 && a.im == 0.0));
    }
}
