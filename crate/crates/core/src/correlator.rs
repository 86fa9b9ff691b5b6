//! Covariance matrix of local Pauli operators and the quantities derived
//! from it: the maximal fluctuation of an additive operator, pairwise
//! correlation strength and the Mermin value.
//!
//! Entry `V[(x,α),(y,β)] = ½⟨{Δσ_α(x), Δσ_β(y)}⟩` lives at row `3x+α`,
//! column `3y+β`, with α ordered x, y, z. An additive operator
//! `A = Σ_x c_x·σ(x)` has variance `cᵀ V c`.

use nalgebra::{DMatrix, Matrix3, SymmetricEigen, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::statevec::{apply_site_matrix, transition_bloch_all, Gate, SiteOperator, StateVector, C64};

/// Relative gap between the relaxed bound and the constrained optimum above
/// which reports carry a warning.
pub const DISCREPANCY_WARN: f64 = 0.10;

#[derive(Clone, Debug)]
pub struct CovarianceMatrix {
    n: usize,
    data: DMatrix<f64>,
    bloch: Vec<[f64; 3]>,
}

/// Builds the 3N×3N covariance matrix.
///
/// Each row `(x,α)` comes from one Pauli-rotated copy `σ_α(x)|ψ⟩` and a single
/// pass over the amplitudes. Rows are computed in parallel and assembled in
/// site-major order, so the result does not depend on the worker count.
pub fn build_vcm(state: &StateVector) -> CovarianceMatrix {
    let n = state.n_qubits();
    let bloch = state.bloch_vectors();
    let psi = state.amplitudes();
    let rows: Vec<Vec<f64>> = (0..3 * n)
        .into_par_iter()
        .map(|row| {
            let (x, alpha) = (row / 3, row % 3);
            let phi = state.pauli_rotated(x, alpha);
            let t = transition_bloch_all(psi, &phi, n);
            let mut out = vec![0.0; 3 * n];
            for y in 0..n {
                for beta in 0..3 {
                    out[3 * y + beta] = t[y][beta].re - bloch[x][alpha] * bloch[y][beta];
                }
            }
            out
        })
        .collect();
    let mut data = DMatrix::from_fn(3 * n, 3 * n, |i, j| rows[i][j]);
    // Remove rounding asymmetry.
    for i in 0..3 * n {
        for j in (i + 1)..3 * n {
            let m = 0.5 * (data[(i, j)] + data[(j, i)]);
            data[(i, j)] = m;
            data[(j, i)] = m;
        }
    }
    CovarianceMatrix { n, data, bloch }
}

impl CovarianceMatrix {
    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.data
    }

    pub fn bloch(&self, x: usize) -> [f64; 3] {
        self.bloch[x]
    }

    pub fn entry(&self, x: usize, alpha: usize, y: usize, beta: usize) -> f64 {
        self.data[(3 * x + alpha, 3 * y + beta)]
    }

    /// The 3×3 block `V_xy`.
    pub fn block(&self, x: usize, y: usize) -> Matrix3<f64> {
        self.data.fixed_view::<3, 3>(3 * x, 3 * y).into_owned()
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = self.data.clone().symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    /// Largest eigenvalue and a unit eigenvector.
    pub fn top_eigenpair(&self) -> (f64, Vec<f64>) {
        let eig = SymmetricEigen::new(self.data.clone());
        let k = eig.eigenvalues.imax();
        (eig.eigenvalues[k], eig.eigenvectors.column(k).iter().copied().collect())
    }

    /// `Σ_{x,y} c_xᵀ V_xy c_y`.
    pub fn quadratic_form(&self, coeffs: &[[f64; 3]]) -> f64 {
        let c: Vec<f64> = coeffs.iter().flatten().copied().collect();
        let v = nalgebra::DVector::from_vec(c);
        (v.transpose() * &self.data * &v)[(0, 0)]
    }

    /// Variance of `Σ_x axis·σ(x)`.
    pub fn uniform_variance(&self, axis: [f64; 3]) -> f64 {
        self.quadratic_form(&vec![axis; self.n])
    }

    /// `axisᵀ V_xy axis` for all site pairs, as an N×N matrix.
    pub fn axis_projection(&self, axis: [f64; 3]) -> DMatrix<f64> {
        let a = Vector3::from(axis);
        DMatrix::from_fn(self.n, self.n, |x, y| (a.transpose() * self.block(x, y) * a)[(0, 0)])
    }

    /// Largest singular value of the cross block `V_xy`.
    pub fn pair_strength(&self, x: usize, y: usize) -> f64 {
        self.block(x, y).singular_values().max()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// `N · e_max`, the eigenvalue bound over `Σ‖c_x‖² = N`.
    #[default]
    Relaxed,
    /// Coordinate ascent over per-site unit vectors.
    Oracle,
    /// Both; the relaxed value is the reported estimate.
    Both,
}

#[derive(Clone, Copy, Debug)]
pub struct OracleConfig {
    pub starts: usize,
    pub max_sweeps: usize,
    pub rel_tol: f64,
    pub seed: u64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            starts: 8,
            max_sweeps: 500,
            rel_tol: 1e-10,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct FluctuationResult {
    pub n_qubits: usize,
    pub e_max: f64,
    pub relaxed_max: f64,
    pub oracle_max: Option<f64>,
    pub argmax_coeffs: Option<Vec<SiteOperator>>,
}

impl FluctuationResult {
    pub fn estimate(&self, method: Method) -> f64 {
        match method {
            Method::Oracle => self.oracle_max.unwrap_or(self.relaxed_max),
            Method::Relaxed | Method::Both => self.relaxed_max,
        }
    }

    /// `relaxed / oracle − 1`, when the oracle was run.
    pub fn discrepancy(&self) -> Option<f64> {
        self.oracle_max
            .filter(|o| *o > 0.0)
            .map(|o| self.relaxed_max / o - 1.0)
    }

    pub fn discrepancy_warning(&self) -> bool {
        self.discrepancy().is_some_and(|d| d > DISCREPANCY_WARN)
    }
}

pub fn max_fluctuation(state: &StateVector, method: Method) -> Result<FluctuationResult> {
    let vcm = build_vcm(state);
    Ok(max_fluctuation_from(&vcm, method, &OracleConfig::default()))
}

pub fn max_fluctuation_from(
    vcm: &CovarianceMatrix,
    method: Method,
    config: &OracleConfig,
) -> FluctuationResult {
    let n = vcm.n_qubits();
    let (e_max, top) = vcm.top_eigenpair();
    let relaxed_max = n as f64 * e_max;
    let (oracle_max, argmax_coeffs) = match method {
        Method::Relaxed => (None, None),
        Method::Oracle | Method::Both => {
            let (value, coeffs) = constrained_max(vcm, &top, config);
            let ops = coeffs
                .iter()
                .map(|c| SiteOperator::normalized(*c).expect("unit coefficients"))
                .collect();
            (Some(value), Some(ops))
        }
    };
    FluctuationResult {
        n_qubits: n,
        e_max,
        relaxed_max,
        oracle_max,
        argmax_coeffs,
    }
}

fn random_unit<R: Rng>(rng: &mut R) -> [f64; 3] {
    let z: f64 = rng.random_range(-1.0..=1.0);
    let phi: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    let r = (1.0 - z * z).max(0.0).sqrt();
    [r * phi.cos(), r * phi.sin(), z]
}

/// Multistart coordinate ascent for `max cᵀVc` over `‖c_x‖ = 1` at every site.
fn constrained_max(vcm: &CovarianceMatrix, top: &[f64], config: &OracleConfig) -> (f64, Vec<[f64; 3]>) {
    let n = vcm.n_qubits();
    let mut starts: Vec<Vec<[f64; 3]>> = Vec::new();
    starts.push(
        (0..n)
            .map(|x| {
                let b = [top[3 * x], top[3 * x + 1], top[3 * x + 2]];
                let norm = crate::statevec::norm3(&b);
                if norm > 1e-8 {
                    b.map(|v| v / norm)
                } else {
                    [0.0, 0.0, 1.0]
                }
            })
            .collect(),
    );
    for axis in [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]] {
        starts.push(vec![axis; n]);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    while starts.len() < config.starts.max(1) {
        starts.push((0..n).map(|_| random_unit(&mut rng)).collect());
    }
    starts.truncate(config.starts.max(1));

    let blocks: Vec<Vec<Matrix3<f64>>> = (0..n)
        .map(|x| (0..n).map(|y| vcm.block(x, y)).collect())
        .collect();
    let mut best: Option<(f64, Vec<[f64; 3]>)> = None;
    for start in starts {
        let (value, coeffs) = ascend(&blocks, start, config);
        if best.as_ref().is_none_or(|(b, _)| value > *b) {
            best = Some((value, coeffs));
        }
    }
    best.expect("at least one start")
}

fn objective(blocks: &[Vec<Matrix3<f64>>], c: &[Vector3<f64>]) -> f64 {
    let mut total = 0.0;
    for (x, row) in blocks.iter().enumerate() {
        for (y, b) in row.iter().enumerate() {
            total += c[x].dot(&(b * c[y]));
        }
    }
    total
}

fn ascend(blocks: &[Vec<Matrix3<f64>>], start: Vec<[f64; 3]>, config: &OracleConfig) -> (f64, Vec<[f64; 3]>) {
    let n = blocks.len();
    let mut c: Vec<Vector3<f64>> = start.into_iter().map(Vector3::from).collect();
    let mut value = objective(blocks, &c);
    for _ in 0..config.max_sweeps {
        for x in 0..n {
            let mut field = Vector3::zeros();
            for y in 0..n {
                if y != x {
                    field += blocks[x][y] * c[y];
                }
            }
            let a = &blocks[x][x];
            let local = |v: &Vector3<f64>| v.dot(&(a * v)) + 2.0 * field.dot(v);
            let candidate = maximize_on_sphere(a, &field, &c[x]);
            // Ties keep the previous direction.
            if local(&candidate) > local(&c[x]) + 1e-15 * (1.0 + local(&c[x]).abs()) {
                c[x] = candidate;
            }
        }
        let next = objective(blocks, &c);
        let improvement = next - value;
        value = next;
        if improvement <= config.rel_tol * value.abs().max(1e-300) {
            break;
        }
    }
    (value, c.iter().map(|v| [v[0], v[1], v[2]]).collect())
}

/// Exact maximizer of `vᵀAv + 2bᵀv` over unit `v` (trust-region subproblem).
///
/// Stationary points satisfy `(μ − A)v = b`; the global maximum has
/// `μ ≥ λ_max(A)`, found from the secular equation `Σ β_i²/(μ − λ_i)² = 1`.
/// In the hard case (`b` orthogonal to the top eigenspace) the top-space
/// component is taken along `prev` where possible.
pub(crate) fn maximize_on_sphere(a: &Matrix3<f64>, b: &Vector3<f64>, prev: &Vector3<f64>) -> Vector3<f64> {
    let eig = SymmetricEigen::new(*a);
    let mut idx = [0usize, 1, 2];
    idx.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let lam: Vec<f64> = idx.iter().map(|&i| eig.eigenvalues[i]).collect();
    let u: Vec<Vector3<f64>> = idx.iter().map(|&i| eig.eigenvectors.column(i).into_owned()).collect();
    let beta: Vec<f64> = u.iter().map(|ui| ui.dot(b)).collect();
    let scale = 1.0 + lam[0].abs() + b.norm();
    let degenerate_tol = 1e-12 * scale;
    let top: Vec<usize> = (0..3).filter(|&i| lam[0] - lam[i] <= degenerate_tol).collect();
    let beta_top = top.iter().map(|&i| beta[i] * beta[i]).sum::<f64>().sqrt();

    let solve_secular = || -> Vector3<f64> {
        let g = |mu: f64| -> f64 {
            (0..3)
                .map(|i| {
                    let d = mu - lam[i];
                    if beta[i] == 0.0 {
                        0.0
                    } else {
                        beta[i] * beta[i] / (d * d)
                    }
                })
                .sum::<f64>()
                - 1.0
        };
        let (mut lo, mut hi) = (lam[0], lam[0] + b.norm());
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if g(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let mu = hi;
        let v: Vector3<f64> = (0..3).map(|i| u[i] * (beta[i] / (mu - lam[i]))).sum();
        v.normalize()
    };

    if beta_top > 1e-14 * scale {
        return solve_secular();
    }
    // Hard case: b has no component in the top eigenspace.
    let w: Vector3<f64> = (0..3)
        .filter(|i| !top.contains(i))
        .map(|i| u[i] * (beta[i] / (lam[0] - lam[i])))
        .sum();
    let wn = w.norm();
    if wn >= 1.0 {
        return solve_secular();
    }
    let mut dir: Vector3<f64> = top.iter().map(|&i| u[i] * u[i].dot(prev)).sum();
    if dir.norm() < 1e-12 {
        dir = u[top[0]];
    }
    let dir = dir.normalize();
    w + dir * (1.0 - wn * wn).sqrt()
}

/// `sup |½⟨{δa(x), δb(y)}⟩|` over unit `a`, `b`: the largest singular value of
/// the 3×3 cross block.
pub fn pair_strength(state: &StateVector, x: usize, y: usize) -> Result<f64> {
    state.check_site(x)?;
    state.check_site(y)?;
    if x == y {
        return Err(Error::InvalidArgument("pair_strength needs x ≠ y".into()));
    }
    Ok(build_vcm(state).pair_strength(x, y))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MerminValue {
    pub value: f64,
    pub lhv_bound: f64,
    pub ratio: f64,
}

/// Expectation of `M = ½[⊗(σ_x + iσ_y) + ⊗(σ_x − iσ_y)]` against the
/// local-hidden-variable bound (`2^{N/2}` for even N, `2^{(N−1)/2}` for odd N).
pub fn mermin_value(state: &StateVector) -> Result<MerminValue> {
    let n = state.n_qubits();
    if n < 2 {
        return Err(Error::InvalidArgument("Mermin value needs N ≥ 2".into()));
    }
    let zero = C64::new(0.0, 0.0);
    let two = C64::new(2.0, 0.0);
    // σ_x + iσ_y = 2|0⟩⟨1|, σ_x − iσ_y = 2|1⟩⟨0|.
    let raise: Gate = [[zero, two], [zero, zero]];
    let lower: Gate = [[zero, zero], [two, zero]];
    let mut total = C64::new(0.0, 0.0);
    for ladder in [raise, lower] {
        let mut phi = state.amplitudes().to_vec();
        for site in 0..n {
            apply_site_matrix(&mut phi, site, &ladder);
        }
        total += state
            .amplitudes()
            .iter()
            .zip(&phi)
            .map(|(a, b)| a.conj() * b)
            .sum::<C64>();
    }
    let value = 0.5 * total.re;
    let lhv_bound = if n % 2 == 0 {
        2f64.powi((n / 2) as i32)
    } else {
        2f64.powi(((n - 1) / 2) as i32)
    };
    Ok(MerminValue {
        value,
        lhv_bound,
        ratio: value / lhv_bound,
    })
}
