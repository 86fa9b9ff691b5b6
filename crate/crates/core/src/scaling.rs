//! Sweeps over system size, log–log exponent fits, the cluster range `Ω(ε)`
//! and NFS/AFS classification.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::correlator::{build_vcm, max_fluctuation_from, CovarianceMatrix, Method, OracleConfig};
use crate::decoherence::{gamma_perturbative_from, mc_fidelity, NoiseModel};
use crate::error::{Error, Result};
use crate::seeds::task_seed;
use crate::stategen::StateFamily;
use crate::statevec::StateVector;

pub const MIN_FIT_POINTS: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    MaxFluctuation,
    Gamma,
    #[serde(rename = "one_minus_F")]
    OneMinusF,
    #[serde(rename = "delta_T")]
    DeltaT,
}

impl Quantity {
    pub fn name(&self) -> &'static str {
        match self {
            Quantity::MaxFluctuation => "max_fluctuation",
            Quantity::Gamma => "gamma",
            Quantity::OneMinusF => "one_minus_F",
            Quantity::DeltaT => "delta_T",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesPoint {
    pub n: usize,
    pub value: f64,
    pub stderr: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingSeries {
    pub family: String,
    pub quantity: Quantity,
    pub points: Vec<SeriesPoint>,
}

impl ScalingSeries {
    /// Builds a series from `(N, value)` pairs; `N` must be strictly increasing.
    pub fn new(family: impl Into<String>, quantity: Quantity, points: &[(usize, f64)]) -> Result<Self> {
        let points: Vec<SeriesPoint> = points
            .iter()
            .map(|&(n, value)| SeriesPoint { n, value, stderr: None })
            .collect();
        check_increasing(points.iter().map(|p| p.n))?;
        Ok(ScalingSeries {
            family: family.into(),
            quantity,
            points,
        })
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.points.iter().map(|p| p.n).collect()
    }

    pub fn values(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.value).collect()
    }
}

fn check_increasing(ns: impl Iterator<Item = usize>) -> Result<()> {
    let mut prev: Option<usize> = None;
    for n in ns {
        if prev.is_some_and(|p| n <= p) {
            return Err(Error::InvalidArgument("N values must be strictly increasing".into()));
        }
        prev = Some(n);
    }
    Ok(())
}

#[derive(Clone, Debug)]
pub struct SweepConfig {
    pub seed: u64,
    pub method: Method,
    pub oracle: OracleConfig,
    pub noise: Option<NoiseModel>,
    /// Evolution time for `OneMinusF`.
    pub t: f64,
    /// Monte Carlo runs for `OneMinusF`.
    pub runs: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            seed: 0,
            method: Method::Relaxed,
            oracle: OracleConfig::default(),
            noise: None,
            t: 1e-3,
            runs: 4000,
        }
    }
}

/// Evaluates `quantity` on `family` at each size.
///
/// Sizes run in parallel; each is seeded from `(config.seed, N)` and the
/// points come back in input order.
pub fn sweep(family: &StateFamily, quantity: Quantity, n_list: &[usize], config: &SweepConfig) -> Result<ScalingSeries> {
    check_increasing(n_list.iter().copied())?;
    if quantity == Quantity::DeltaT {
        return Err(Error::InvalidArgument(
            "delta_T is defined for Shor instances, not state families".into(),
        ));
    }
    if matches!(quantity, Quantity::Gamma | Quantity::OneMinusF) && config.noise.is_none() {
        return Err(Error::InvalidArgument(format!("{} sweep needs a noise model", quantity.name())));
    }
    let points: Vec<SeriesPoint> = n_list
        .par_iter()
        .map(|&n| sample_point(family, quantity, n, config).map_err(|e| e.at_size(n)))
        .collect::<Result<_>>()?;
    Ok(ScalingSeries {
        family: family.label(),
        quantity,
        points,
    })
}

fn sample_point(family: &StateFamily, quantity: Quantity, n: usize, config: &SweepConfig) -> Result<SeriesPoint> {
    let state = family.generate(n)?;
    let task = task_seed(config.seed, n as u64);
    let (value, stderr) = match quantity {
        Quantity::MaxFluctuation => {
            let vcm = build_vcm(&state);
            let oracle = OracleConfig {
                seed: task,
                ..config.oracle
            };
            let r = max_fluctuation_from(&vcm, config.method, &oracle);
            (r.estimate(config.method), None)
        }
        Quantity::Gamma => {
            let noise = config.noise.as_ref().expect("checked");
            let vcm = build_vcm(&state);
            (gamma_perturbative_from(&vcm, noise, state.geometry())?, None)
        }
        Quantity::OneMinusF => {
            let noise = config.noise.as_ref().expect("checked");
            let (f, err) = mc_fidelity(&state, noise, config.t, config.runs, task)?;
            (1.0 - f, Some(err))
        }
        Quantity::DeltaT => unreachable!(),
    };
    Ok(SeriesPoint { n, value, stderr })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub exponent: f64,
    pub prefactor: f64,
    pub stderr: f64,
    pub r_squared: f64,
}

/// OLS fit of `ln value = exponent · ln N + ln prefactor`.
pub fn fit_exponent(series: &ScalingSeries) -> Result<ScalingFit> {
    let pts: Vec<(usize, f64)> = series.points.iter().map(|p| (p.n, p.value)).collect();
    fit_power_law(&pts)
}

pub fn fit_power_law(points: &[(usize, f64)]) -> Result<ScalingFit> {
    if points.len() < MIN_FIT_POINTS {
        return Err(Error::TooFewPoints {
            needed: MIN_FIT_POINTS,
            got: points.len(),
        });
    }
    for &(n, value) in points {
        if !(value > 0.0) || n == 0 {
            return Err(Error::NonPositiveSample { n, value });
        }
    }
    let xs: Vec<f64> = points.iter().map(|p| (p.0 as f64).ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let m = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidArgument("all N values are equal".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let stderr = (ssr / (m - 2.0) / sxx).sqrt();
    let r_squared = if syy > 0.0 { (1.0 - ssr / syy).clamp(0.0, 1.0) } else { 1.0 };
    Ok(ScalingFit {
        exponent: slope,
        prefactor: intercept.exp(),
        stderr,
        r_squared,
    })
}

/// Site pairs `x < y` whose correlation strength exceeds `epsilon`.
pub fn violating_pairs(vcm: &CovarianceMatrix, epsilon: f64) -> Vec<(usize, usize, f64)> {
    let n = vcm.n_qubits();
    let mut out = Vec::new();
    for x in 0..n {
        for y in (x + 1)..n {
            let s = vcm.pair_strength(x, y);
            if s > epsilon {
                out.push((x, y, s));
            }
        }
    }
    out
}

/// Smallest `R` such that every pair farther apart than `R` has
/// `pair_strength ≤ ε`.
///
/// Returns `N` when correlations above `ε` reach the largest distance the
/// geometry allows, i.e. the range cannot be bounded at this size.
pub fn omega_range(state: &StateVector, epsilon: f64) -> Result<usize> {
    omega_range_from(&build_vcm(state), state, epsilon)
}

pub fn omega_range_from(vcm: &CovarianceMatrix, state: &StateVector, epsilon: f64) -> Result<usize> {
    if !(epsilon > 0.0) {
        return Err(Error::InvalidArgument(format!("epsilon must be > 0, got {epsilon}")));
    }
    let n = state.n_qubits();
    let reach = violating_pairs(vcm, epsilon)
        .iter()
        .map(|&(x, y, _)| state.distance(x, y))
        .max()
        .unwrap_or(0);
    if n > 1 && reach >= state.geometry().max_distance(n) {
        Ok(n)
    } else {
        Ok(reach)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FluctuationClass {
    #[serde(rename = "NFS")]
    Nfs,
    #[serde(rename = "intermediate")]
    Intermediate,
    #[serde(rename = "AFS")]
    Afs,
}

impl std::fmt::Display for FluctuationClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            FluctuationClass::Nfs => "NFS",
            FluctuationClass::Intermediate => "intermediate",
            FluctuationClass::Afs => "AFS",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassThresholds {
    pub nfs_below: f64,
    pub afs_above: f64,
}

impl Default for ClassThresholds {
    fn default() -> Self {
        ClassThresholds {
            nfs_below: 1.25,
            afs_above: 1.75,
        }
    }
}

pub fn classify(fit: &ScalingFit) -> FluctuationClass {
    classify_with(fit, &ClassThresholds::default())
}

pub fn classify_with(fit: &ScalingFit, thresholds: &ClassThresholds) -> FluctuationClass {
    if fit.exponent < thresholds.nfs_below {
        FluctuationClass::Nfs
    } else if fit.exponent > thresholds.afs_above {
        FluctuationClass::Afs
    } else {
        FluctuationClass::Intermediate
    }
}
