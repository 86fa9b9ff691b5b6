//! States of the order-finding circuit at three stages, their fluctuation
//! class, and their sensitivity to a dephasing kick.
//!
//! Layout: the first register (`n1 = 2L` qubits) occupies sites `0..n1`, the
//! second register (`L` qubits) sites `n1..n1+L`, so basis index
//! `a + 2^{n1}·b` holds `|a⟩|b⟩`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::correlator::{max_fluctuation, FluctuationResult, Method};
use crate::decoherence::{apply_dephasing_kick, check_short_time, NoiseModel, PhaseSampler};
use crate::error::{Error, Result};
use crate::scaling::FluctuationClass;
use crate::seeds::task_rng;
use crate::statevec::{fidelity, gates, qubit_cap, StateVector, C64};

const RUNS_PER_CHUNK: usize = 64;

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn pow_mod(base: u64, mut exp: u64, m: u64) -> u64 {
    let mut result = 1 % m;
    let mut b = base % m;
    while exp > 0 {
        if exp & 1 == 1 {
            result = result * b % m;
        }
        b = b * b % m;
        exp >>= 1;
    }
    result
}

fn is_prime(m: u64) -> bool {
    m >= 2 && (2..).take_while(|d| d * d <= m).all(|d| m % d != 0)
}

fn is_prime_power(m: u64) -> bool {
    (2..=m).find(|d| m % d == 0).is_some_and(|p| {
        let mut r = m;
        while r % p == 0 {
            r /= p;
        }
        r == 1
    })
}

/// Multiplicative order of `x` modulo `m`.
pub fn multiplicative_order(x: u64, m: u64) -> Option<u64> {
    if m < 2 || gcd(x, m) != 1 {
        return None;
    }
    let mut v = x % m;
    for r in 1..=m {
        if v == 1 {
            return Some(r);
        }
        v = v * x % m;
    }
    None
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShorInstance {
    pub m: u64,
    pub x: u64,
    pub l: usize,
    pub n1: usize,
    pub r: u64,
}

impl ShorInstance {
    pub fn new(m: u64, x: u64) -> Result<Self> {
        let bad = |msg: String| Err(Error::InvalidInstance(msg));
        if m < 9 || m % 2 == 0 {
            return bad(format!("M = {m} must be odd and at least 9"));
        }
        if is_prime(m) || is_prime_power(m) {
            return bad(format!("M = {m} must be composite and not a prime power"));
        }
        if x < 2 || x >= m {
            return bad(format!("base {x} must lie in 2..{m}"));
        }
        if gcd(x, m) != 1 {
            return bad(format!("base {x} shares a factor with {m}"));
        }
        let r = multiplicative_order(x, m).expect("coprime base has an order");
        let l = (64 - m.leading_zeros()) as usize;
        let n1 = 2 * l;
        let cap = qubit_cap();
        if n1 + l > cap {
            return Err(Error::QubitCap {
                requested: n1 + l,
                cap,
            });
        }
        Ok(ShorInstance { m, x, l, n1, r })
    }

    pub fn n_total(&self) -> usize {
        self.n1 + self.l
    }

    /// Size of the first register's outcome space, `2^{n1}`.
    pub fn q(&self) -> usize {
        1 << self.n1
    }

    /// Whether measuring `k` on the first register leads to a factor.
    ///
    /// The continued-fraction convergents of `k/2^{n1}` are scanned for the
    /// first denominator `r' < M` with `x^{r'} ≡ 1`; then `r'` must be even,
    /// `x^{r'/2} ≢ −1` and `gcd(x^{r'/2} ± 1, M)` must be nontrivial.
    pub fn outcome_succeeds(&self, k: usize) -> bool {
        let Some(r) = self.recovered_order(k) else { return false };
        if r % 2 == 1 {
            return false;
        }
        let h = pow_mod(self.x, r / 2, self.m);
        if h == self.m - 1 {
            return false;
        }
        let f = gcd(h + 1, self.m).max(gcd(h + self.m - 1, self.m));
        f > 1 && f < self.m
    }

    fn recovered_order(&self, k: usize) -> Option<u64> {
        let (mut num, mut den) = (k as u64, self.q() as u64);
        let (mut q_prev, mut q) = (1u64, 0u64);
        while den != 0 {
            let a = num / den;
            (num, den) = (den, num - a * den);
            (q_prev, q) = (q, a * q + q_prev);
            if q >= self.m {
                break;
            }
            if q > 0 && pow_mod(self.x, q, self.m) == 1 {
                return Some(q);
            }
        }
        None
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Stage {
    /// After the Hadamard layer.
    Ht,
    /// After modular exponentiation.
    Me,
    /// After the Fourier transform on the first register.
    Final,
}

impl Stage {
    pub const ALL: [Stage; 3] = [Stage::Ht, Stage::Me, Stage::Final];

    pub fn name(&self) -> &'static str {
        match self {
            Stage::Ht => "HT",
            Stage::Me => "ME",
            Stage::Final => "FINAL",
        }
    }
}

#[derive(Clone, Debug)]
pub struct StageState {
    pub stage: Stage,
    pub state: StateVector,
}

pub fn build_stage(instance: &ShorInstance, stage: Stage) -> Result<StageState> {
    let mut state = hadamard_stage(instance)?;
    if stage != Stage::Ht {
        state = modular_exponentiation(instance, &state)?;
    }
    if stage == Stage::Final {
        qft_first_register(instance, &mut state)?;
    }
    Ok(StageState { stage, state })
}

fn hadamard_stage(instance: &ShorInstance) -> Result<StateVector> {
    let mut state = StateVector::basis_index(instance.n_total(), instance.q())?;
    for site in 0..instance.n1 {
        state.apply_one_qubit_in_place(site, &gates::hadamard())?;
    }
    Ok(state)
}

/// `|a⟩|b⟩ → |a⟩|b·x^a mod M⟩` for `b < M`, identity for `b ≥ M`.
pub fn modular_exponentiation(instance: &ShorInstance, state: &StateVector) -> Result<StateVector> {
    let q = instance.q();
    let powers: Vec<u64> = (0..q).map(|a| pow_mod(instance.x, a as u64, instance.m)).collect();
    state.permute_basis(|i| {
        let (a, b) = (i % q, (i / q) as u64);
        let b2 = if b < instance.m { b * powers[a] % instance.m } else { b };
        a + q * b2 as usize
    })
}

/// `|a⟩ → 2^{−n1/2} Σ_k e^{2πi a k / 2^{n1}} |k⟩` on sites `0..n1`.
pub fn qft_first_register(instance: &ShorInstance, state: &mut StateVector) -> Result<()> {
    qft_sites(state, instance.n1)
}

/// Fourier transform on sites `0..width`, built from Hadamards, controlled
/// phases and a final bit reversal.
pub fn qft_sites(state: &mut StateVector, width: usize) -> Result<()> {
    for j in (0..width).rev() {
        state.apply_one_qubit_in_place(j, &gates::hadamard())?;
        for m in (0..j).rev() {
            let theta = std::f64::consts::PI / (1u64 << (j - m)) as f64;
            state.apply_controlled_phase_in_place(m, j, theta)?;
        }
    }
    for i in 0..width / 2 {
        state.swap_in_place(i, width - 1 - i)?;
    }
    Ok(())
}

/// Marginal distribution of the first register.
pub fn first_register_distribution(instance: &ShorInstance, state: &StateVector) -> Vec<f64> {
    let q = instance.q();
    let mut p = vec![0.0; q];
    for (i, a) in state.amplitudes().iter().enumerate() {
        p[i % q] += a.norm_sqr();
    }
    p
}

/// Success probability `T = Σ_k P(k)·[k succeeds]` of a FINAL-stage state.
pub fn success_probability(state: &StateVector, instance: &ShorInstance) -> Result<f64> {
    if state.n_qubits() != instance.n_total() {
        return Err(Error::SizeMismatch(state.n_qubits(), instance.n_total()));
    }
    let p = first_register_distribution(instance, state);
    let t: f64 = p
        .iter()
        .enumerate()
        .filter(|(k, _)| instance.outcome_succeeds(*k))
        .map(|(_, pk)| pk)
        .sum();
    Ok(t.clamp(0.0, 1.0))
}

#[derive(Clone, Debug)]
pub struct StageIndex {
    pub fluctuation: FluctuationResult,
    /// `max_fluctuation / N_total`.
    pub ratio: f64,
    pub class: FluctuationClass,
}

/// Single-size bands for `max_fluctuation`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageBands {
    /// `max_fluctuation / N` at or below this is NFS.
    pub nfs_ratio: f64,
    /// `max_fluctuation / N²` at or above this is AFS.
    pub afs_fraction: f64,
}

impl Default for StageBands {
    fn default() -> Self {
        StageBands {
            nfs_ratio: 1.5,
            afs_fraction: 0.05,
        }
    }
}

pub fn stage_index_p(instance: &ShorInstance, stage: Stage) -> Result<StageIndex> {
    stage_index_p_with(instance, stage, &StageBands::default())
}

pub fn stage_index_p_with(instance: &ShorInstance, stage: Stage, bands: &StageBands) -> Result<StageIndex> {
    let st = build_stage(instance, stage)?;
    let fluctuation = max_fluctuation(&st.state, Method::Relaxed)?;
    let n = instance.n_total() as f64;
    let value = fluctuation.relaxed_max;
    let ratio = value / n;
    let class = if ratio <= bands.nfs_ratio {
        FluctuationClass::Nfs
    } else if value >= bands.afs_fraction * n * n {
        FluctuationClass::Afs
    } else {
        FluctuationClass::Intermediate
    };
    Ok(StageIndex {
        fluctuation,
        ratio,
        class,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoisyStageReport {
    pub one_minus_f: f64,
    pub one_minus_f_stderr: f64,
    pub t_clean: f64,
    pub t_noisy: f64,
    pub delta_t: f64,
    pub delta_t_stderr: f64,
}

/// Applies one dephasing kick of duration `t` at `stage`, runs the rest of
/// the circuit noiselessly, and reports `(1−F, T_clean − T)` averaged over
/// `runs` realizations.
pub fn noisy_stage_report(
    instance: &ShorInstance,
    stage: Stage,
    noise: &NoiseModel,
    t: f64,
    runs: usize,
    seed: u64,
) -> Result<NoisyStageReport> {
    if runs < 2 {
        return Err(Error::InvalidArgument("need at least 2 Monte Carlo runs".into()));
    }
    if t < 0.0 {
        return Err(Error::InvalidArgument(format!("time must be ≥ 0, got {t}")));
    }
    let n = instance.n_total();
    check_short_time(noise, t, n)?;
    let clean = build_stage(instance, stage)?.state;
    let clean_final = build_stage(instance, Stage::Final)?.state;
    let t_clean = success_probability(&clean_final, instance)?;
    let sampler = PhaseSampler::new(noise, n, clean.geometry(), t)?;

    let finish = |mut s: StateVector| -> Result<StateVector> {
        if stage == Stage::Ht {
            s = modular_exponentiation(instance, &s)?;
        }
        if stage != Stage::Final {
            qft_first_register(instance, &mut s)?;
        }
        Ok(s)
    };

    let chunks = runs.div_ceil(RUNS_PER_CHUNK);
    let partial: Vec<[f64; 4]> = (0..chunks)
        .into_par_iter()
        .map(|chunk| -> Result<[f64; 4]> {
            let mut rng = task_rng(seed, chunk as u64);
            let count = RUNS_PER_CHUNK.min(runs - chunk * RUNS_PER_CHUNK);
            let mut acc = [0.0; 4];
            for _ in 0..count {
                let phases = sampler.sample(&mut rng);
                let mut kicked = clean.clone();
                apply_dephasing_kick(&mut kicked, noise.axis, &phases)?;
                let loss = 1.0 - fidelity(&clean, &kicked)?;
                let dt = t_clean - success_probability(&finish(kicked)?, instance)?;
                acc[0] += loss;
                acc[1] += loss * loss;
                acc[2] += dt;
                acc[3] += dt * dt;
            }
            Ok(acc)
        })
        .collect::<Result<_>>()?;
    let mut s = [0.0; 4];
    for p in &partial {
        for i in 0..4 {
            s[i] += p[i];
        }
    }
    let m = runs as f64;
    let mean_err = |s1: f64, s2: f64| {
        let mean = s1 / m;
        let var = ((s2 - m * mean * mean) / (m - 1.0)).max(0.0);
        (mean, (var / m).sqrt())
    };
    let (one_minus_f, one_minus_f_stderr) = mean_err(s[0], s[1]);
    let (delta_t, delta_t_stderr) = mean_err(s[2], s[3]);
    Ok(NoisyStageReport {
        one_minus_f: one_minus_f.max(0.0),
        one_minus_f_stderr,
        t_clean,
        t_noisy: t_clean - delta_t,
        delta_t,
        delta_t_stderr,
    })
}

/// Amplitude of `|k⟩|b⟩` after the Fourier transform, for tests and tools
/// that want to bypass the gate sequence.
pub fn dft_amplitude(instance: &ShorInstance, state: &StateVector, k: usize, b: usize) -> C64 {
    let q = instance.q();
    let amps = state.amplitudes();
    let scale = 1.0 / (q as f64).sqrt();
    (0..q)
        .map(|a| {
            let angle = 2.0 * std::f64::consts::PI * ((a * k) % q) as f64 / q as f64;
            amps[a + q * b] * C64::from_polar(scale, angle)
        })
        .sum()
}
