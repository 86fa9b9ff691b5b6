//! Dense reference implementations shared by the integration tests.
#![allow(dead_code)]

use macroent::statevec::C64;
use nalgebra::DMatrix;

pub type CMat = DMatrix<C64>;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn pauli(alpha: usize) -> CMat {
    let z = c(0.0, 0.0);
    let o = c(1.0, 0.0);
    let i = c(0.0, 1.0);
    match alpha {
        0 => CMat::from_row_slice(2, 2, &[z, o, o, z]),
        1 => CMat::from_row_slice(2, 2, &[z, -i, i, z]),
        2 => CMat::from_row_slice(2, 2, &[o, z, z, -o]),
        _ => panic!("pauli index"),
    }
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

/// `op` on `site` of `n` qubits, with site 0 as the least significant bit:
/// the full matrix is `I ⊗ … ⊗ op ⊗ … ⊗ I` with site `n−1` leftmost.
pub fn embed(op: &CMat, site: usize, n: usize) -> CMat {
    let mut m = CMat::identity(1, 1);
    for s in (0..n).rev() {
        let f = if s == site { op.clone() } else { CMat::identity(2, 2) };
        m = kron(&m, &f);
    }
    m
}

pub fn expect(psi: &[C64], op: &CMat) -> C64 {
    let v = nalgebra::DVector::from_column_slice(psi);
    (v.adjoint() * op * &v)[(0, 0)]
}

/// Dense covariance matrix `Re⟨σ_α(x)σ_β(y)⟩ − ⟨σ_α(x)⟩⟨σ_β(y)⟩`.
pub fn dense_vcm(psi: &[C64], n: usize) -> DMatrix<f64> {
    let ops: Vec<CMat> = (0..n)
        .flat_map(|x| (0..3).map(move |a| (x, a)))
        .map(|(x, a)| embed(&pauli(a), x, n))
        .collect();
    let means: Vec<f64> = ops.iter().map(|o| expect(psi, o).re).collect();
    DMatrix::from_fn(3 * n, 3 * n, |i, j| expect(psi, &(&ops[i] * &ops[j])).re - means[i] * means[j])
}

/// Product state from `(θ, φ)` Bloch angles, site 0 first, via Kronecker products.
pub fn kron_product(qubits: &[[C64; 2]]) -> Vec<C64> {
    let mut v = CMat::identity(1, 1);
    for q in qubits.iter().rev() {
        v = kron(&v, &CMat::from_column_slice(2, 1, q));
    }
    v.column(0).iter().copied().collect()
}

pub fn random_unitary(seed: u64) -> [[C64; 2]; 2] {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let (a, b, g, d): (f64, f64, f64, f64) = (rng.random(), rng.random(), rng.random(), rng.random());
    let tau = std::f64::consts::TAU;
    let (th, ph, la, gl) = (a * std::f64::consts::PI, b * tau, g * tau, d * tau);
    let e = |x: f64| C64::from_polar(1.0, x);
    [
        [e(gl) * (th / 2.0).cos(), -e(gl + la) * (th / 2.0).sin()],
        [e(gl + ph) * (th / 2.0).sin(), e(gl + ph + la) * (th / 2.0).cos()],
    ]
}

pub fn gate_matrix(u: &[[C64; 2]; 2]) -> CMat {
    CMat::from_row_slice(2, 2, &[u[0][0], u[0][1], u[1][0], u[1][1]])
}

/// Lowest eigenvalue of a dense real symmetric matrix.
pub fn dense_min_eigen(m: DMatrix<f64>) -> (f64, Vec<f64>) {
    let eig = m.symmetric_eigen();
    let (k, v) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(k, v)| (k, *v))
        .unwrap();
    (v, eig.eigenvectors.column(k).iter().copied().collect())
}

/// Dense transverse-field Ising ring Hamiltonian `−J Σ σzσz − h Σ σx`.
pub fn dense_ising(n: usize, j: f64, h: f64) -> DMatrix<f64> {
    let dim = 1usize << n;
    let bonds: Vec<(usize, usize)> = if n == 2 { vec![(0, 1)] } else { (0..n).map(|x| (x, (x + 1) % n)).collect() };
    let mut m = DMatrix::<f64>::zeros(dim, dim);
    for i in 0..dim {
        for &(a, b) in &bonds {
            let same = ((i >> a) & 1) == ((i >> b) & 1);
            m[(i, i)] -= j * if same { 1.0 } else { -1.0 };
        }
        for x in 0..n {
            m[(i ^ (1 << x), i)] -= h;
        }
    }
    m
}
