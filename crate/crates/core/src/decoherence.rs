//! Classical Gaussian dephasing noise with tunable spatial correlation.
//!
//! A noise realization over time `t` is a vector of phases `φ ~ N(0, g·t)`
//! where `g` is the site-pair kernel; it acts as `⊗_x exp(−i φ_x n·σ(x))`.
//! To second order the log-fidelity decays at rate
//! `Γ = Σ_{x,y} g(x,y) nᵀV_xy n`, which is what [`gamma_perturbative`]
//! returns and what [`gamma_montecarlo`] estimates by sampling.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::correlator::{build_vcm, CovarianceMatrix};
use crate::error::{Error, Result};
use crate::scaling::{fit_exponent, sweep, Quantity, ScalingFit, SweepConfig};
use crate::seeds::task_rng;
use crate::stategen::StateFamily;
use crate::statevec::{apply_site_matrix, gates, Geometry, SiteOperator, StateVector, C64};

/// `γ·t·N²` above this is outside the short-time regime.
pub const SHORT_TIME_LIMIT: f64 = 0.5;
/// Default excess exponent above 1 that counts as fragile.
pub const FRAGILE_THRESHOLD: f64 = 0.25;

const RUNS_PER_CHUNK: usize = 256;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseKind {
    /// Independent noise on every site: `g = γ·δ_xy`.
    White,
    /// One noise field shared by all sites: `g = γ`.
    Collective,
    /// `g = γ·exp(−d(x,y)/ξ)`.
    Exponential,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub kind: NoiseKind,
    pub gamma: f64,
    pub xi: f64,
    pub axis: [f64; 3],
}

impl NoiseModel {
    pub fn new(kind: NoiseKind, gamma: f64, xi: f64, axis: [f64; 3]) -> Result<Self> {
        let model = NoiseModel { kind, gamma, xi, axis };
        model.validate()?;
        Ok(model)
    }

    pub fn white(gamma: f64) -> Result<Self> {
        Self::new(NoiseKind::White, gamma, 1.0, [0.0, 0.0, 1.0])
    }

    pub fn collective(gamma: f64) -> Result<Self> {
        Self::new(NoiseKind::Collective, gamma, 1.0, [0.0, 0.0, 1.0])
    }

    pub fn exponential(gamma: f64, xi: f64) -> Result<Self> {
        Self::new(NoiseKind::Exponential, gamma, xi, [0.0, 0.0, 1.0])
    }

    pub fn with_axis(mut self, axis: [f64; 3]) -> Result<Self> {
        self.axis = SiteOperator::new(axis)?.coeffs();
        Ok(self)
    }

    pub fn with_gamma(mut self, gamma: f64) -> Result<Self> {
        self.gamma = gamma;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(Error::InvalidArgument(format!("noise strength must be > 0, got {}", self.gamma)));
        }
        if self.kind == NoiseKind::Exponential && !(self.xi > 0.0 && self.xi.is_finite()) {
            return Err(Error::InvalidArgument(format!("correlation length must be > 0, got {}", self.xi)));
        }
        SiteOperator::new(self.axis)?;
        Ok(())
    }

    pub fn correlation(&self, n: usize, geometry: Geometry, x: usize, y: usize) -> f64 {
        match self.kind {
            NoiseKind::White => {
                if x == y {
                    self.gamma
                } else {
                    0.0
                }
            }
            NoiseKind::Collective => self.gamma,
            NoiseKind::Exponential => self.gamma * (-(geometry.distance(n, x, y) as f64) / self.xi).exp(),
        }
    }

    /// The N×N kernel, rejected unless positive semidefinite.
    pub fn kernel(&self, n: usize, geometry: Geometry) -> Result<DMatrix<f64>> {
        self.validate()?;
        let g = DMatrix::from_fn(n, n, |x, y| self.correlation(n, geometry, x, y));
        let min = g.clone().symmetric_eigenvalues().min();
        if min < -1e-10 * self.gamma * n as f64 {
            return Err(Error::KernelNotPsd(min));
        }
        Ok(g)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GammaReport {
    pub gamma_pert: f64,
    pub gamma_mc: f64,
    pub mc_stderr: f64,
}

/// Second-order decoherence rate `Σ g(x,y) nᵀV_xy n`.
pub fn gamma_perturbative(state: &StateVector, noise: &NoiseModel) -> Result<f64> {
    gamma_perturbative_from(&build_vcm(state), noise, state.geometry())
}

pub fn gamma_perturbative_from(vcm: &CovarianceMatrix, noise: &NoiseModel, geometry: Geometry) -> Result<f64> {
    let n = vcm.n_qubits();
    let g = noise.kernel(n, geometry)?;
    let proj = vcm.axis_projection(noise.axis);
    let gamma = g.component_mul(&proj).sum();
    Ok(gamma.max(0.0))
}

/// Draws phase vectors `φ ~ N(0, g·t)`.
#[derive(Clone, Debug)]
pub struct PhaseSampler {
    factor: DMatrix<f64>,
}

impl PhaseSampler {
    pub fn new(noise: &NoiseModel, n: usize, geometry: Geometry, t: f64) -> Result<Self> {
        if !(t >= 0.0 && t.is_finite()) {
            return Err(Error::InvalidArgument(format!("time must be ≥ 0, got {t}")));
        }
        let g = noise.kernel(n, geometry)? * t;
        // Eigen-factor instead of Cholesky: collective kernels are singular.
        let eig = SymmetricEigen::new(g);
        let sqrt = eig.eigenvalues.map(|l| l.max(0.0).sqrt());
        let factor = &eig.eigenvectors * DMatrix::from_diagonal(&sqrt);
        Ok(PhaseSampler { factor })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let n = self.factor.nrows();
        let z: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        (0..n)
            .map(|i| (0..n).map(|k| self.factor[(i, k)] * z[k]).sum())
            .collect()
    }
}

/// Applies `⊗_x exp(−i φ_x n·σ(x))` in place.
pub fn apply_dephasing_kick(state: &mut StateVector, axis: [f64; 3], phases: &[f64]) -> Result<()> {
    if phases.len() != state.n_qubits() {
        return Err(Error::SizeMismatch(phases.len(), state.n_qubits()));
    }
    for (site, phi) in phases.iter().enumerate() {
        state.apply_one_qubit_in_place(site, &gates::axis_rotation(axis, *phi))?;
    }
    Ok(())
}

/// Sum of `±φ_x` over the sites for every basis index, `+` for bit 0.
fn phase_sums(phases: &[f64], out: &mut Vec<f64>) {
    out.clear();
    out.push(0.0);
    for &phi in phases {
        let len = out.len();
        for i in 0..len {
            out.push(out[i] - phi);
        }
        for v in out.iter_mut().take(len) {
            *v += phi;
        }
    }
}

/// Mean and standard error of `|⟨ψ|U_φ|ψ⟩|²` over `runs` noise realizations.
pub fn mc_fidelity(
    state: &StateVector,
    noise: &NoiseModel,
    t: f64,
    runs: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    if runs < 2 {
        return Err(Error::InvalidArgument("need at least 2 Monte Carlo runs".into()));
    }
    let n = state.n_qubits();
    let sampler = PhaseSampler::new(noise, n, state.geometry(), t)?;
    // Rotate once so the noise axis becomes z; the kick is then diagonal.
    let mut amps = state.amplitudes().to_vec();
    let r = gates::align_to_z(noise.axis);
    for site in 0..n {
        apply_site_matrix(&mut amps, site, &r);
    }
    let weights: Vec<f64> = amps.iter().map(|a| a.norm_sqr()).collect();

    let chunks = runs.div_ceil(RUNS_PER_CHUNK);
    let partial: Vec<(f64, f64)> = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut rng = task_rng(seed, chunk as u64);
            let count = RUNS_PER_CHUNK.min(runs - chunk * RUNS_PER_CHUNK);
            let mut sums = Vec::with_capacity(weights.len());
            let (mut s1, mut s2) = (0.0, 0.0);
            for _ in 0..count {
                let phases = sampler.sample(&mut rng);
                phase_sums(&phases, &mut sums);
                let overlap: C64 = weights
                    .iter()
                    .zip(&sums)
                    .map(|(w, s)| C64::from_polar(*w, -s))
                    .sum();
                let f = overlap.norm_sqr();
                s1 += f;
                s2 += f * f;
            }
            (s1, s2)
        })
        .collect();
    let (s1, s2) = partial.iter().fold((0.0, 0.0), |acc, p| (acc.0 + p.0, acc.1 + p.1));
    let m = runs as f64;
    let mean = s1 / m;
    let var = ((s2 - m * mean * mean) / (m - 1.0)).max(0.0);
    Ok((mean, (var / m).sqrt()))
}

pub fn check_short_time(noise: &NoiseModel, t: f64, n: usize) -> Result<()> {
    let x = noise.gamma * t * (n * n) as f64;
    if x > SHORT_TIME_LIMIT {
        return Err(Error::NotShortTime(x));
    }
    Ok(())
}

/// Monte Carlo decoherence rate `−ln F(t)/t` and its standard error.
pub fn gamma_montecarlo(
    state: &StateVector,
    noise: &NoiseModel,
    t: f64,
    runs: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    if !(t > 0.0) {
        return Err(Error::InvalidArgument(format!("time must be > 0, got {t}")));
    }
    check_short_time(noise, t, state.n_qubits())?;
    let (f, f_err) = mc_fidelity(state, noise, t, runs, seed)?;
    if f <= 0.0 {
        return Err(Error::InvalidArgument("fidelity vanished; shorten t".into()));
    }
    Ok((-f.ln() / t, f_err / (f * t)))
}

/// Both rates for one state.
pub fn gamma_report(
    state: &StateVector,
    noise: &NoiseModel,
    t: f64,
    runs: usize,
    seed: u64,
) -> Result<GammaReport> {
    let gamma_pert = gamma_perturbative(state, noise)?;
    let (gamma_mc, mc_stderr) = gamma_montecarlo(state, noise, t, runs, seed)?;
    Ok(GammaReport {
        gamma_pert,
        gamma_mc,
        mc_stderr,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct FragilityReport {
    pub fit: ScalingFit,
    /// `exponent − 1`.
    pub delta: f64,
    pub fragile: bool,
    pub threshold: f64,
}

/// Fits `Γ ∼ K N^{1+δ}` over `n_list`; fragile iff `δ > threshold`.
pub fn fragility_exponent(family: &StateFamily, noise: &NoiseModel, n_list: &[usize]) -> Result<FragilityReport> {
    fragility_exponent_with(family, noise, n_list, FRAGILE_THRESHOLD, &SweepConfig::default())
}

pub fn fragility_exponent_with(
    family: &StateFamily,
    noise: &NoiseModel,
    n_list: &[usize],
    threshold: f64,
    config: &SweepConfig,
) -> Result<FragilityReport> {
    let config = SweepConfig {
        noise: Some(*noise),
        ..config.clone()
    };
    let series = sweep(family, Quantity::Gamma, n_list, &config)?;
    let fit = fit_exponent(&series)?;
    let delta = fit.exponent - 1.0;
    Ok(FragilityReport {
        fit,
        delta,
        fragile: delta > threshold,
        threshold,
    })
}
