//! Restarted Lanczos for the lowest eigenpair of a real symmetric operator
//! that is only available through matrix-vector products.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

/// Matrix-free real symmetric operator.
pub trait SymmetricOperator: Sync {
    fn dim(&self) -> usize;

    /// `out = A x`.
    fn apply(&self, x: &[f64], out: &mut [f64]);

    /// Projects `v` onto an invariant subspace that is known to contain the
    /// wanted eigenvector. Default is the identity.
    fn restrict(&self, _v: &mut [f64]) {}
}

#[derive(Clone, Copy, Debug)]
pub struct LanczosConfig {
    /// Krylov dimension per restart cycle.
    pub krylov_dim: usize,
    /// Residual tolerance, relative to `max(1, |θ|)`.
    pub tol: f64,
    /// Budget on operator applications.
    pub max_iter: usize,
}

impl Default for LanczosConfig {
    fn default() -> Self {
        LanczosConfig {
            krylov_dim: 40,
            tol: 1e-10,
            max_iter: 10_000,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Eigenpair {
    pub value: f64,
    pub vector: Vec<f64>,
    pub residual: f64,
    pub iterations: usize,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalize(v: &mut [f64]) -> f64 {
    let n = dot(v, v).sqrt();
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
    n
}

/// Lowest eigenpair of `op`, starting from `start`.
///
/// Each cycle builds a Krylov basis with full reorthogonalization, takes the
/// lowest Ritz vector and restarts from it until the explicit residual
/// `‖A x − θ x‖` drops below `tol · max(1, |θ|)`.
pub fn lowest_eigenpair<O: SymmetricOperator + ?Sized>(
    op: &O,
    start: &[f64],
    config: &LanczosConfig,
) -> Result<Eigenpair> {
    let dim = op.dim();
    if start.len() != dim {
        return Err(Error::InvalidArgument(format!(
            "start vector has length {} but operator dimension is {dim}",
            start.len()
        )));
    }
    let mut x = start.to_vec();
    op.restrict(&mut x);
    if normalize(&mut x) == 0.0 {
        return Err(Error::InvalidArgument("zero start vector".into()));
    }

    let m_max = config.krylov_dim.clamp(2, dim.max(2));
    let mut iterations = 0usize;
    let mut work = vec![0.0; dim];
    let mut residual = f64::INFINITY;

    while iterations < config.max_iter {
        let mut basis: Vec<Vec<f64>> = Vec::with_capacity(m_max);
        let mut alpha = Vec::with_capacity(m_max);
        let mut beta: Vec<f64> = Vec::with_capacity(m_max);
        basis.push(x.clone());

        for j in 0..m_max {
            op.apply(&basis[j], &mut work);
            iterations += 1;
            op.restrict(&mut work);
            let a = dot(&basis[j], &work);
            alpha.push(a);
            // Two passes of classical Gram-Schmidt against the full basis.
            for _ in 0..2 {
                for q in basis.iter() {
                    let c = dot(q, &work);
                    work.iter_mut().zip(q).for_each(|(w, qi)| *w -= c * qi);
                }
            }
            let b = dot(&work, &work).sqrt();
            if j + 1 == m_max || b < 1e-13 * a.abs().max(1.0) || iterations >= config.max_iter {
                break;
            }
            beta.push(b);
            basis.push(work.iter().map(|w| w / b).collect());
        }

        let m = alpha.len();
        let t = DMatrix::from_fn(m, m, |i, j| {
            if i == j {
                alpha[i]
            } else if i + 1 == j {
                beta[i]
            } else if j + 1 == i {
                beta[j]
            } else {
                0.0
            }
        });
        let eig = SymmetricEigen::new(t);
        let (k, &theta) = eig
            .eigenvalues
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .expect("nonempty tridiagonal");
        x.iter_mut().for_each(|v| *v = 0.0);
        for (i, q) in basis.iter().take(m).enumerate() {
            let c = eig.eigenvectors[(i, k)];
            x.iter_mut().zip(q).for_each(|(xi, qi)| *xi += c * qi);
        }
        op.restrict(&mut x);
        normalize(&mut x);

        op.apply(&x, &mut work);
        iterations += 1;
        residual = work
            .iter()
            .zip(&x)
            .map(|(ax, xi)| (ax - theta * xi).powi(2))
            .sum::<f64>()
            .sqrt();
        if residual <= config.tol * theta.abs().max(1.0) {
            // Rayleigh quotient of the final vector.
            let value = dot(&x, &work);
            return Ok(Eigenpair {
                value,
                vector: x,
                residual,
                iterations,
            });
        }
    }
    Err(Error::NoConvergence {
        iterations,
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Dense(DMatrix<f64>);

    impl SymmetricOperator for Dense {
        fn dim(&self) -> usize {
            self.0.nrows()
        }
        fn apply(&self, x: &[f64], out: &mut [f64]) {
            for (i, o) in out.iter_mut().enumerate() {
                *o = (0..x.len()).map(|j| self.0[(i, j)] * x[j]).sum();
            }
        }
    }

    #[test]
    fn matches_dense_on_path_laplacian() {
        let n = 120;
        let a = DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                2.0 + 0.01 * i as f64
            } else if i.abs_diff(j) == 1 {
                -1.0
            } else {
                0.0
            }
        });
        let expected = a.clone().symmetric_eigenvalues().min();
        let start: Vec<f64> = (0..n).map(|i| 1.0 + (i as f64 * 0.37).sin()).collect();
        let pair = lowest_eigenpair(&Dense(a), &start, &LanczosConfig::default()).unwrap();
        assert!((pair.value - expected).abs() < 1e-9, "{} vs {expected}", pair.value);
        assert!(pair.residual < 1e-10 * pair.value.abs().max(1.0));
    }

    #[test]
    fn small_operator_converges_in_one_cycle() {
        let a = DMatrix::from_row_slice(3, 3, &[2.0, 1.0, 0.0, 1.0, 2.0, 1.0, 0.0, 1.0, 2.0]);
        let pair = lowest_eigenpair(&Dense(a), &[1.0, 0.5, 0.25], &LanczosConfig::default()).unwrap();
        assert!((pair.value - (2.0 - 2f64.sqrt())).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_start() {
        let a = DMatrix::<f64>::identity(4, 4);
        assert!(lowest_eigenpair(&Dense(a.clone()), &[0.0; 4], &LanczosConfig::default()).is_err());
        assert!(lowest_eigenpair(&Dense(a), &[1.0; 3], &LanczosConfig::default()).is_err());
    }

    #[test]
    fn reports_non_convergence() {
        let n = 200;
        let a = DMatrix::from_fn(n, n, |i, j| if i == j { i as f64 } else if i.abs_diff(j) == 1 { 0.5 } else { 0.0 });
        let cfg = LanczosConfig {
            krylov_dim: 3,
            tol: 1e-14,
            max_iter: 6,
        };
        let start = vec![1.0; n];
        assert!(matches!(
            lowest_eigenpair(&Dense(a), &start, &cfg),
            Err(Error::NoConvergence { .. })
        ));
    }
}
