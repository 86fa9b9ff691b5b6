//! Stability against local measurements.
//!
//! The disturbance of site `y` by a projective measurement of `n·σ` at site
//! `x` is `sqrt(λ_max(Σ_o p_o (v_o − v)(v_o − v)ᵀ))`, where `v` is the Bloch
//! vector of `y` before and `v_o` after outcome `o`. It is maximized over the
//! measurement axis `n`.

use nalgebra::Matrix3;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::correlator::{build_vcm, CovarianceMatrix};
use crate::error::{Error, Result};
use crate::statevec::StateVector;

/// Points of the Fibonacci sphere used as the coarse axis grid.
pub const AXIS_GRID_POINTS: usize = 256;
/// Angular tolerance of the axis refinement.
pub const AXIS_TOLERANCE: f64 = 1e-6;

const MIN_BRANCH_PROB: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DisturbanceReport {
    pub x: usize,
    pub y: usize,
    pub value: f64,
    pub argmax_axis: [f64; 3],
}

/// Single-pair data needed to evaluate the disturbance for any axis.
#[derive(Clone, Copy, Debug)]
pub struct PairData {
    v_x: [f64; 3],
    v_y: [f64; 3],
    /// `C[α][β] = ⟨σ_α(x) σ_β(y)⟩`.
    corr: Matrix3<f64>,
}

impl PairData {
    pub fn from_vcm(vcm: &CovarianceMatrix, x: usize, y: usize) -> Self {
        let v_x = vcm.bloch(x);
        let v_y = vcm.bloch(y);
        let mut corr = vcm.block(x, y);
        for a in 0..3 {
            for b in 0..3 {
                corr[(a, b)] += v_x[a] * v_y[b];
            }
        }
        PairData { v_x, v_y, corr }
    }

    /// Squared disturbance for measurement axis `n` (unit).
    pub fn lambda(&self, n: [f64; 3]) -> f64 {
        let nv: f64 = (0..3).map(|a| n[a] * self.v_x[a]).sum();
        // Cᵀn
        let ctn: [f64; 3] = std::array::from_fn(|b| (0..3).map(|a| n[a] * self.corr[(a, b)]).sum());
        let mut m = Matrix3::<f64>::zeros();
        for o in [1.0, -1.0] {
            let p = 0.5 * (1.0 + o * nv);
            if p < MIN_BRANCH_PROB {
                continue;
            }
            let d: [f64; 3] = std::array::from_fn(|b| 0.5 * (self.v_y[b] + o * ctn[b]) / p - self.v_y[b]);
            for a in 0..3 {
                for b in 0..3 {
                    m[(a, b)] += p * d[a] * d[b];
                }
            }
        }
        m.symmetric_eigenvalues().max().max(0.0)
    }
}

/// `count` nearly uniform unit vectors.
pub fn fibonacci_sphere(count: usize) -> Vec<[f64; 3]> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..count)
        .map(|i| {
            let z = 1.0 - (2.0 * i as f64 + 1.0) / count as f64;
            let r = (1.0 - z * z).sqrt();
            let phi = golden * i as f64;
            [r * phi.cos(), r * phi.sin(), z]
        })
        .collect()
}

fn to_angles(n: [f64; 3]) -> (f64, f64) {
    (n[2].clamp(-1.0, 1.0).acos(), n[1].atan2(n[0]))
}

fn from_angles(theta: f64, phi: f64) -> [f64; 3] {
    [theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()]
}

/// Compass search on the sphere, in tangent directions, from `start`.
fn refine_axis(f: &impl Fn([f64; 3]) -> f64, start: [f64; 3], tol: f64) -> ([f64; 3], f64) {
    let mut best = start;
    let mut best_val = f(best);
    let mut step = 0.1;
    while step > tol {
        let (theta, phi) = to_angles(best);
        let e_theta = [theta.cos() * phi.cos(), theta.cos() * phi.sin(), -theta.sin()];
        let e_phi = [-phi.sin(), phi.cos(), 0.0];
        let mut improved = false;
        for dir in [e_theta, e_phi] {
            for sign in [1.0, -1.0] {
                let (c, s) = (step.cos(), (sign * step).sin());
                let cand = [
                    c * best[0] + s * dir[0],
                    c * best[1] + s * dir[1],
                    c * best[2] + s * dir[2],
                ];
                let norm = (cand[0] * cand[0] + cand[1] * cand[1] + cand[2] * cand[2]).sqrt();
                let cand = [cand[0] / norm, cand[1] / norm, cand[2] / norm];
                let val = f(cand);
                if val > best_val {
                    best = cand;
                    best_val = val;
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    let (theta, phi) = to_angles(best);
    (from_angles(theta, phi), best_val)
}

/// Disturbance of site `y` by the most disturbing projective measurement at `x`.
pub fn disturbance(state: &StateVector, x: usize, y: usize) -> Result<DisturbanceReport> {
    state.check_site(x)?;
    state.check_site(y)?;
    if x == y {
        return Err(Error::InvalidArgument("disturbance needs two distinct sites".into()));
    }
    Ok(disturbance_from(&build_vcm(state), x, y))
}

pub fn disturbance_from(vcm: &CovarianceMatrix, x: usize, y: usize) -> DisturbanceReport {
    let data = PairData::from_vcm(vcm, x, y);
    let f = |n: [f64; 3]| data.lambda(n);
    let mut start = [0.0, 0.0, 1.0];
    let mut start_val = f64::NEG_INFINITY;
    for n in fibonacci_sphere(AXIS_GRID_POINTS) {
        let v = f(n);
        if v > start_val {
            start = n;
            start_val = v;
        }
    }
    let (axis, lambda) = refine_axis(&f, start, AXIS_TOLERANCE);
    DisturbanceReport {
        x,
        y,
        value: lambda.sqrt(),
        argmax_axis: axis,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairRow {
    pub x: usize,
    pub y: usize,
    pub distance: usize,
    pub pair_strength: f64,
    pub disturbance: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilityConfig {
    /// Prefactor of the tested bound `disturbance ≤ C·√ε`.
    pub c: f64,
    /// Pairs closer than this are skipped.
    pub min_distance: usize,
}

impl Default for StabilityConfig {
    fn default() -> Self {
        StabilityConfig { c: 1.0, min_distance: 1 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub epsilon: f64,
    pub c: f64,
    /// Smallest `C` for which every row satisfies `disturbance ≤ C·√pair_strength`.
    pub c_hat: Option<f64>,
    pub rows: Vec<PairRow>,
    /// Rows with `pair_strength ≤ ε` but `disturbance > C·√ε`.
    pub violations: Vec<PairRow>,
}

/// Pair strength and disturbance for the given pairs, in input order.
pub fn pair_table(state: &StateVector, vcm: &CovarianceMatrix, pairs: &[(usize, usize)]) -> Result<Vec<PairRow>> {
    for &(x, y) in pairs {
        state.check_site(x)?;
        state.check_site(y)?;
        if x == y {
            return Err(Error::InvalidArgument(format!("pair ({x}, {y}) repeats a site")));
        }
    }
    Ok(pairs
        .par_iter()
        .map(|&(x, y)| PairRow {
            x,
            y,
            distance: state.distance(x, y),
            pair_strength: vcm.pair_strength(x, y),
            disturbance: disturbance_from(vcm, x, y).value,
        })
        .collect())
}

/// Every pair `x < y` at least `min_distance` apart.
pub fn all_pairs(state: &StateVector, min_distance: usize) -> Vec<(usize, usize)> {
    let n = state.n_qubits();
    (0..n)
        .flat_map(|x| ((x + 1)..n).map(move |y| (x, y)))
        .filter(|&(x, y)| state.distance(x, y) >= min_distance)
        .collect()
}

pub fn stability_vs_cluster(state: &StateVector, epsilon: f64) -> Result<StabilityReport> {
    stability_vs_cluster_with(state, epsilon, &StabilityConfig::default())
}

pub fn stability_vs_cluster_with(
    state: &StateVector,
    epsilon: f64,
    config: &StabilityConfig,
) -> Result<StabilityReport> {
    if !(epsilon > 0.0) {
        return Err(Error::InvalidArgument(format!("epsilon must be > 0, got {epsilon}")));
    }
    let vcm = build_vcm(state);
    let rows = pair_table(state, &vcm, &all_pairs(state, config.min_distance))?;
    let bound = config.c * epsilon.sqrt();
    let violations = rows
        .iter()
        .filter(|r| r.pair_strength <= epsilon && r.disturbance > bound)
        .copied()
        .collect();
    let c_hat = rows
        .iter()
        .filter(|r| r.pair_strength > 1e-12)
        .map(|r| r.disturbance / r.pair_strength.sqrt())
        .reduce(f64::max);
    Ok(StabilityReport {
        epsilon,
        c: config.c,
        c_hat,
        rows,
        violations,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReductionPolicy {
    /// Measure a site of the strongest remaining pair along its most
    /// disturbing axis.
    ArgmaxPair,
    /// Measure sites `0, 1, 2, …` along z.
    RoundRobinZ,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReductionStep {
    pub site: usize,
    pub axis: [f64; 3],
    pub outcome: i8,
    pub probability: f64,
    /// Largest pair strength after this measurement.
    pub max_pair_strength: f64,
}

#[derive(Clone, Debug)]
pub struct ReductionOutcome {
    pub count: usize,
    pub final_state: StateVector,
    pub initial_max_pair_strength: f64,
    pub steps: Vec<ReductionStep>,
}

fn strongest_pair(vcm: &CovarianceMatrix, measured: &[bool]) -> Option<(usize, usize, f64)> {
    let n = vcm.n_qubits();
    let mut best: Option<(usize, usize, f64)> = None;
    for x in 0..n {
        for y in (x + 1)..n {
            if measured[x] && measured[y] {
                continue;
            }
            let s = vcm.pair_strength(x, y);
            if best.is_none_or(|b| s > b.2) {
                best = Some((x, y, s));
            }
        }
    }
    best
}

/// Measures single sites until every pair strength is at most `epsilon` or
/// `N` measurements have been made. Each site is measured at most once.
pub fn iterated_reduction<R: Rng + ?Sized>(
    state: &StateVector,
    epsilon: f64,
    policy: ReductionPolicy,
    rng: &mut R,
) -> Result<ReductionOutcome> {
    if !(epsilon > 0.0) {
        return Err(Error::InvalidArgument(format!("epsilon must be > 0, got {epsilon}")));
    }
    let n = state.n_qubits();
    let mut current = state.clone();
    let mut measured = vec![false; n];
    let mut steps = Vec::new();
    let mut vcm = build_vcm(&current);
    let max_strength = |vcm: &CovarianceMatrix| strongest_pair(vcm, &vec![false; n]).map_or(0.0, |p| p.2);
    let initial_max_pair_strength = max_strength(&vcm);
    let mut level = initial_max_pair_strength;

    while level > epsilon && steps.len() < n {
        let (site, axis) = match policy {
            ReductionPolicy::ArgmaxPair => {
                let Some((x, y, _)) = strongest_pair(&vcm, &measured) else { break };
                let (site, other) = if measured[x] { (y, x) } else { (x, y) };
                (site, disturbance_from(&vcm, site, other).argmax_axis)
            }
            ReductionPolicy::RoundRobinZ => (steps.len(), [0.0, 0.0, 1.0]),
        };
        let m = current.measure_site(site, axis, rng)?;
        measured[site] = true;
        current = m.post_state;
        vcm = build_vcm(&current);
        level = max_strength(&vcm);
        steps.push(ReductionStep {
            site,
            axis,
            outcome: m.outcome,
            probability: m.probability,
            max_pair_strength: level,
        });
    }
    Ok(ReductionOutcome {
        count: steps.len(),
        final_state: current,
        initial_max_pair_strength,
        steps,
    })
}
