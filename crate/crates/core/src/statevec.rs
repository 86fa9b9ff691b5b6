//! Dense pure-state kernel.
//!
//! Amplitudes are stored in the computational basis with site 0 as the least
//! significant bit of the index: basis index `i` has site `x` in state
//! `(i >> x) & 1`. Bitstrings passed to [`StateVector::basis`] are written
//! site 0 first, so `"10"` on two qubits is index 1. `σ_z|0⟩ = +|0⟩`.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// 2×2 complex matrix, row-major.
pub type Gate = [[C64; 2]; 2];

pub const DEFAULT_QUBIT_CAP: usize = 26;
pub const QUBIT_CAP_ENV: &str = "MACROENT_QUBIT_CAP";

const NORM_TOL: f64 = 1e-10;
const UNITARY_TOL: f64 = 1e-10;
const UNIT_VECTOR_TOL: f64 = 1e-12;
const VANISHING_PROB: f64 = 1e-12;

/// Hard limit on the number of qubits; `MACROENT_QUBIT_CAP` overrides the default.
pub fn qubit_cap() -> usize {
    std::env::var(QUBIT_CAP_ENV)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_QUBIT_CAP)
}

fn check_cap(n: usize) -> Result<()> {
    let cap = qubit_cap();
    if n > cap {
        return Err(Error::QubitCap { requested: n, cap });
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Geometry {
    Chain,
    #[default]
    Ring,
}

impl Geometry {
    pub fn distance(self, n: usize, x: usize, y: usize) -> usize {
        let d = x.abs_diff(y);
        match self {
            Geometry::Chain => d,
            Geometry::Ring => d.min(n - d),
        }
    }

    /// Largest distance between two distinct sites.
    pub fn max_distance(self, n: usize) -> usize {
        match self {
            Geometry::Chain => n.saturating_sub(1),
            Geometry::Ring => n / 2,
        }
    }
}

/// Unit-norm traceless single-site observable `c_x σ_x + c_y σ_y + c_z σ_z`.
///
/// A unit Pauli vector has operator norm 1, which is the normalization used
/// for every local operator entering an additive observable.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SiteOperator([f64; 3]);

impl SiteOperator {
    pub const X: SiteOperator = SiteOperator([1.0, 0.0, 0.0]);
    pub const Y: SiteOperator = SiteOperator([0.0, 1.0, 0.0]);
    pub const Z: SiteOperator = SiteOperator([0.0, 0.0, 1.0]);

    pub fn new(coeffs: [f64; 3]) -> Result<Self> {
        let norm = norm3(&coeffs);
        if (norm - 1.0).abs() > UNIT_VECTOR_TOL {
            return Err(Error::NotUnitVector {
                norm,
                deviation: (norm - 1.0).abs(),
            });
        }
        Ok(SiteOperator(coeffs))
    }

    /// Rescales `coeffs` to unit length. Fails on the zero vector.
    pub fn normalized(coeffs: [f64; 3]) -> Result<Self> {
        let norm = norm3(&coeffs);
        if norm < 1e-300 || !norm.is_finite() {
            return Err(Error::InvalidArgument("zero or non-finite Pauli vector".into()));
        }
        Ok(SiteOperator(coeffs.map(|c| c / norm)))
    }

    pub fn from_axis(alpha: usize) -> Self {
        match alpha {
            0 => Self::X,
            1 => Self::Y,
            _ => Self::Z,
        }
    }

    pub fn coeffs(&self) -> [f64; 3] {
        self.0
    }

    /// The operator as a 2×2 matrix.
    pub fn matrix(&self) -> Gate {
        let [cx, cy, cz] = self.0;
        [
            [C64::new(cz, 0.0), C64::new(cx, -cy)],
            [C64::new(cx, cy), C64::new(-cz, 0.0)],
        ]
    }
}

pub(crate) fn norm3(v: &[f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

pub(crate) fn dot3(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub mod gates {
    use super::{Gate, C64};
    use std::f64::consts::FRAC_1_SQRT_2;

    const O: C64 = C64::new(0.0, 0.0);
    const I1: C64 = C64::new(1.0, 0.0);

    pub fn identity() -> Gate {
        [[I1, O], [O, I1]]
    }

    pub fn hadamard() -> Gate {
        let h = C64::new(FRAC_1_SQRT_2, 0.0);
        [[h, h], [h, -h]]
    }

    pub fn pauli_x() -> Gate {
        [[O, I1], [I1, O]]
    }

    pub fn pauli_y() -> Gate {
        [[O, C64::new(0.0, -1.0)], [C64::new(0.0, 1.0), O]]
    }

    pub fn pauli_z() -> Gate {
        [[I1, O], [O, -I1]]
    }

    /// `exp(-i θ n·σ)` for a unit axis `n`.
    pub fn axis_rotation(axis: [f64; 3], theta: f64) -> Gate {
        let (s, c) = theta.sin_cos();
        let [nx, ny, nz] = axis;
        [
            [C64::new(c, -s * nz), C64::new(-s * ny, -s * nx)],
            [C64::new(s * ny, -s * nx), C64::new(c, s * nz)],
        ]
    }

    /// Unitary `R` with `R (n·σ) R† = σ_z`, i.e. it maps the `+1` eigenvector of
    /// `n·σ` to `|0⟩`.
    pub fn align_to_z(axis: [f64; 3]) -> Gate {
        let [nx, ny, nz] = axis;
        let theta = nz.clamp(-1.0, 1.0).acos();
        let phi = ny.atan2(nx);
        // Rows are the conjugated eigenvectors |n+⟩, |n−⟩.
        let (s, c) = (theta / 2.0).sin_cos();
        let e = C64::from_polar(1.0, phi);
        let plus = [C64::new(c, 0.0), e * s];
        let minus = [C64::new(-s, 0.0), e * c];
        [
            [plus[0].conj(), plus[1].conj()],
            [minus[0].conj(), minus[1].conj()],
        ]
    }

    pub fn mul(a: &Gate, b: &Gate) -> Gate {
        let mut out = [[O; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        out
    }

    pub fn adjoint(a: &Gate) -> Gate {
        [
            [a[0][0].conj(), a[1][0].conj()],
            [a[0][1].conj(), a[1][1].conj()],
        ]
    }

    /// Max-entry deviation of `u† u` from the identity.
    pub fn unitarity_defect(u: &Gate) -> f64 {
        let p = mul(&adjoint(u), u);
        let id = identity();
        let mut worst: f64 = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                worst = worst.max((p[i][j] - id[i][j]).norm());
            }
        }
        worst
    }
}

/// Result of a sampled projective measurement.
#[derive(Clone, Debug)]
pub struct Measurement {
    pub outcome: i8,
    pub probability: f64,
    pub post_state: StateVector,
}

/// Pure state of `N` qubits.
///
/// Operations taking `&self` return new states and are safe to call
/// concurrently. The `*_in_place` variants mutate and require exclusive access.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<C64>,
    geometry: Geometry,
}

impl StateVector {
    /// `|0…0⟩`.
    pub fn zero(n: usize) -> Result<Self> {
        Self::basis_index(n, 0)
    }

    pub fn basis_index(n: usize, index: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("need at least one qubit".into()));
        }
        check_cap(n)?;
        let dim = 1usize << n;
        if index >= dim {
            return Err(Error::InvalidArgument(format!(
                "basis index {index} out of range for {n} qubits"
            )));
        }
        let mut amps = vec![C64::new(0.0, 0.0); dim];
        amps[index] = C64::new(1.0, 0.0);
        Ok(StateVector {
            n_qubits: n,
            amps,
            geometry: Geometry::default(),
        })
    }

    /// Computational basis state from a bitstring written site 0 first.
    pub fn basis(n: usize, bits: &str) -> Result<Self> {
        if bits.len() != n {
            return Err(Error::InvalidArgument(format!(
                "bitstring has length {} but n = {n}",
                bits.len()
            )));
        }
        check_cap(n)?;
        let mut index = 0usize;
        for (site, ch) in bits.chars().enumerate() {
            match ch {
                '0' => {}
                '1' => index |= 1 << site,
                other => {
                    return Err(Error::InvalidArgument(format!(
                        "invalid bit character {other:?}"
                    )))
                }
            }
        }
        Self::basis_index(n, index)
    }

    /// Wraps an already-normalized amplitude vector.
    pub fn from_amplitudes(amps: Vec<C64>) -> Result<Self> {
        let n = Self::qubits_for_len(amps.len())?;
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized((norm - 1.0).abs()));
        }
        Ok(StateVector {
            n_qubits: n,
            amps,
            geometry: Geometry::default(),
        })
    }

    /// Normalizes `amps` and wraps them. Fails on the zero vector.
    pub fn from_unnormalized(mut amps: Vec<C64>) -> Result<Self> {
        let n = Self::qubits_for_len(amps.len())?;
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-300 || !norm.is_finite() {
            return Err(Error::InvalidArgument("cannot normalize a zero vector".into()));
        }
        amps.iter_mut().for_each(|a| *a /= norm);
        Ok(StateVector {
            n_qubits: n,
            amps,
            geometry: Geometry::default(),
        })
    }

    /// Tensor product of single-qubit states; `qubits[0]` is site 0.
    pub fn product(qubits: &[[C64; 2]]) -> Result<Self> {
        let n = qubits.len();
        if n == 0 {
            return Err(Error::InvalidArgument("need at least one qubit".into()));
        }
        check_cap(n)?;
        let mut amps = vec![C64::new(1.0, 0.0)];
        for q in qubits.iter() {
            let norm = (q[0].norm_sqr() + q[1].norm_sqr()).sqrt();
            if norm < 1e-300 {
                return Err(Error::InvalidArgument("zero single-qubit factor".into()));
            }
            let (q0, q1) = (q[0] / norm, q[1] / norm);
            // New site becomes the next most significant bit.
            let mut next = Vec::with_capacity(amps.len() * 2);
            next.extend(amps.iter().map(|a| a * q0));
            next.extend(amps.iter().map(|a| a * q1));
            amps = next;
        }
        Ok(StateVector {
            n_qubits: n,
            amps,
            geometry: Geometry::default(),
        })
    }

    fn qubits_for_len(len: usize) -> Result<usize> {
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::InvalidArgument(format!(
                "amplitude count {len} is not a power of two ≥ 2"
            )));
        }
        let n = len.trailing_zeros() as usize;
        check_cap(n)?;
        Ok(n)
    }

    pub fn with_geometry(mut self, geometry: Geometry) -> Self {
        self.geometry = geometry;
        self
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn geometry(&self) -> Geometry {
        self.geometry
    }

    pub fn distance(&self, x: usize, y: usize) -> usize {
        self.geometry.distance(self.n_qubits, x, y)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amps
    }

    pub(crate) fn check_site(&self, site: usize) -> Result<()> {
        if site >= self.n_qubits {
            return Err(Error::SiteOutOfRange {
                site,
                n_qubits: self.n_qubits,
            });
        }
        Ok(())
    }

    pub fn apply_one_qubit(&self, site: usize, u: &Gate) -> Result<Self> {
        let mut out = self.clone();
        out.apply_one_qubit_in_place(site, u)?;
        Ok(out)
    }

    pub fn apply_one_qubit_in_place(&mut self, site: usize, u: &Gate) -> Result<()> {
        self.check_site(site)?;
        let deviation = gates::unitarity_defect(u);
        if deviation > UNITARY_TOL {
            return Err(Error::NotUnitary { deviation });
        }
        apply_site_matrix(&mut self.amps, site, u);
        Ok(())
    }

    /// Applies `u` to every site.
    pub fn apply_all_in_place(&mut self, u: &Gate) -> Result<()> {
        let deviation = gates::unitarity_defect(u);
        if deviation > UNITARY_TOL {
            return Err(Error::NotUnitary { deviation });
        }
        for site in 0..self.n_qubits {
            apply_site_matrix(&mut self.amps, site, u);
        }
        Ok(())
    }

    /// Multiplies the amplitude by `e^{iθ}` wherever both sites are 1.
    pub fn apply_controlled_phase_in_place(
        &mut self,
        control: usize,
        target: usize,
        theta: f64,
    ) -> Result<()> {
        self.check_site(control)?;
        self.check_site(target)?;
        if control == target {
            return Err(Error::InvalidArgument("control equals target".into()));
        }
        let mask = (1usize << control) | (1usize << target);
        let phase = C64::from_polar(1.0, theta);
        for (i, a) in self.amps.iter_mut().enumerate() {
            if i & mask == mask {
                *a *= phase;
            }
        }
        Ok(())
    }

    pub fn swap_in_place(&mut self, a: usize, b: usize) -> Result<()> {
        self.check_site(a)?;
        self.check_site(b)?;
        if a == b {
            return Ok(());
        }
        let (ma, mb) = (1usize << a, 1usize << b);
        for i in 0..self.amps.len() {
            // Visit each differing pair once, from the side with bit a set.
            if i & ma != 0 && i & mb == 0 {
                let j = (i & !ma) | mb;
                self.amps.swap(i, j);
            }
        }
        Ok(())
    }

    /// Applies a permutation of basis indices: amplitude at `i` moves to `f(i)`.
    /// `f` must be a bijection on `0..dim`.
    pub fn permute_basis(&self, f: impl Fn(usize) -> usize) -> Result<Self> {
        let mut out = vec![C64::new(0.0, 0.0); self.amps.len()];
        let mut hit = vec![false; self.amps.len()];
        for (i, a) in self.amps.iter().enumerate() {
            let j = f(i);
            if j >= out.len() || hit[j] {
                return Err(Error::InvalidArgument("map is not a permutation".into()));
            }
            hit[j] = true;
            out[j] = *a;
        }
        Ok(StateVector {
            n_qubits: self.n_qubits,
            amps: out,
            geometry: self.geometry,
        })
    }

    /// Copy of the state with `σ_α` applied at `site` (α = 0, 1, 2 for x, y, z).
    pub fn pauli_rotated(&self, site: usize, alpha: usize) -> Vec<C64> {
        let m = 1usize << site;
        let psi = &self.amps;
        match alpha {
            0 => (0..psi.len()).map(|i| psi[i ^ m]).collect(),
            1 => (0..psi.len())
                .map(|i| {
                    let a = psi[i ^ m];
                    if i & m == 0 {
                        C64::new(a.im, -a.re)
                    } else {
                        C64::new(-a.im, a.re)
                    }
                })
                .collect(),
            _ => (0..psi.len())
                .map(|i| if i & m == 0 { psi[i] } else { -psi[i] })
                .collect(),
        }
    }

    /// `(⟨σ_x⟩, ⟨σ_y⟩, ⟨σ_z⟩)` at `site`.
    pub fn bloch_vector(&self, site: usize) -> Result<[f64; 3]> {
        self.check_site(site)?;
        let m = 1usize << site;
        let mut rho10 = C64::new(0.0, 0.0);
        let (mut p0, mut p1) = (0.0, 0.0);
        for chunk in self.amps.chunks(2 * m) {
            let (lo, hi) = chunk.split_at(m);
            for (a0, a1) in lo.iter().zip(hi) {
                rho10 += a1 * a0.conj();
                p0 += a0.norm_sqr();
                p1 += a1.norm_sqr();
            }
        }
        Ok([2.0 * rho10.re, 2.0 * rho10.im, p0 - p1])
    }

    /// Bloch vectors of every site.
    pub fn bloch_vectors(&self) -> Vec<[f64; 3]> {
        (0..self.n_qubits)
            .map(|x| self.bloch_vector(x).expect("site in range"))
            .collect()
    }

    /// `⟨ψ| op(site) |ψ⟩`.
    pub fn expect_site(&self, site: usize, op: &SiteOperator) -> Result<f64> {
        self.check_site(site)?;
        let u = op.matrix();
        let mut acc = C64::new(0.0, 0.0);
        let m = 1usize << site;
        for chunk in self.amps.chunks(2 * m) {
            let (lo, hi) = chunk.split_at(m);
            for (a0, a1) in lo.iter().zip(hi) {
                acc += a0.conj() * (u[0][0] * a0 + u[0][1] * a1)
                    + a1.conj() * (u[1][0] * a0 + u[1][1] * a1);
            }
        }
        debug_assert!(acc.im.abs() < 1e-10, "imaginary residue {}", acc.im);
        Ok(acc.re)
    }

    /// Symmetrized covariance `½⟨{Δa(x), Δb(y)}⟩`.
    pub fn covar_pair_sym(
        &self,
        x: usize,
        a: &SiteOperator,
        y: usize,
        b: &SiteOperator,
    ) -> Result<f64> {
        self.check_site(x)?;
        self.check_site(y)?;
        let mean_a = self.expect_site(x, a)?;
        let mean_b = self.expect_site(y, b)?;
        let (ca, cb) = (a.coeffs(), b.coeffs());
        if x == y {
            // {σ_α, σ_β} = 2δ_αβ
            return Ok(dot3(&ca, &cb) - mean_a * mean_b);
        }
        let mut phi = vec![C64::new(0.0, 0.0); self.amps.len()];
        for (alpha, c) in ca.iter().enumerate() {
            if *c == 0.0 {
                continue;
            }
            for (p, r) in phi.iter_mut().zip(self.pauli_rotated(x, alpha)) {
                *p += r * *c;
            }
        }
        let t = transition_bloch(&self.amps, &phi, y);
        let ab: f64 = (0..3).map(|beta| cb[beta] * t[beta].re).sum();
        Ok(ab - mean_a * mean_b)
    }

    /// Applies the projector `(1 + o n·σ)/2` at `site` and renormalizes.
    ///
    /// Returns the outcome probability and the post-measurement state. A branch
    /// with probability below 1e-12 is an error.
    pub fn project_site(&self, site: usize, axis: [f64; 3], outcome: i8) -> Result<(f64, Self)> {
        self.check_site(site)?;
        let axis = SiteOperator::new(axis)?.coeffs();
        if outcome != 1 && outcome != -1 {
            return Err(Error::InvalidArgument(format!("outcome must be ±1, got {outcome}")));
        }
        let o = f64::from(outcome);
        let [nx, ny, nz] = axis;
        let p: Gate = [
            [C64::new(0.5 * (1.0 + o * nz), 0.0), C64::new(0.5 * o * nx, -0.5 * o * ny)],
            [C64::new(0.5 * o * nx, 0.5 * o * ny), C64::new(0.5 * (1.0 - o * nz), 0.0)],
        ];
        let mut amps = self.amps.clone();
        apply_site_matrix(&mut amps, site, &p);
        let prob: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if prob < VANISHING_PROB {
            return Err(Error::VanishingBranch {
                outcome,
                probability: prob,
            });
        }
        let scale = 1.0 / prob.sqrt();
        amps.iter_mut().for_each(|a| *a *= scale);
        Ok((
            prob,
            StateVector {
                n_qubits: self.n_qubits,
                amps,
                geometry: self.geometry,
            },
        ))
    }

    /// Both outcome branches as `(outcome, probability, post_state)`; a
    /// vanishing branch is reported as `None`.
    pub fn measurement_branches(
        &self,
        site: usize,
        axis: [f64; 3],
    ) -> Result<[(i8, f64, Option<Self>); 2]> {
        let mut out: [(i8, f64, Option<Self>); 2] = [(1, 0.0, None), (-1, 0.0, None)];
        for slot in out.iter_mut() {
            match self.project_site(site, axis, slot.0) {
                Ok((p, s)) => {
                    slot.1 = p;
                    slot.2 = Some(s);
                }
                Err(Error::VanishingBranch { probability, .. }) => slot.1 = probability,
                Err(e) => return Err(e),
            }
        }
        Ok(out)
    }

    /// Projective measurement of `axis·σ` at `site`, outcome sampled from `rng`.
    pub fn measure_site<R: Rng + ?Sized>(
        &self,
        site: usize,
        axis: [f64; 3],
        rng: &mut R,
    ) -> Result<Measurement> {
        self.check_site(site)?;
        let axis = SiteOperator::new(axis)?.coeffs();
        let bloch = self.bloch_vector(site)?;
        let p_plus = (0.5 * (1.0 + dot3(&axis, &bloch))).clamp(0.0, 1.0);
        let draw: f64 = rng.random();
        let mut outcome: i8 = if draw < p_plus { 1 } else { -1 };
        let res = match self.project_site(site, axis, outcome) {
            Err(Error::VanishingBranch { .. }) => {
                outcome = -outcome;
                self.project_site(site, axis, outcome)
            }
            other => other,
        };
        let (probability, post_state) = res?;
        Ok(Measurement {
            outcome,
            probability,
            post_state,
        })
    }

    pub fn inner(&self, other: &Self) -> Result<C64> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::SizeMismatch(self.n_qubits, other.n_qubits));
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }
}

/// `|⟨a|b⟩|²`.
pub fn fidelity(a: &StateVector, b: &StateVector) -> Result<f64> {
    Ok(a.inner(b)?.norm_sqr().min(1.0))
}

/// Applies an arbitrary 2×2 matrix at `site` without any checks.
pub(crate) fn apply_site_matrix(amps: &mut [C64], site: usize, u: &Gate) {
    let m = 1usize << site;
    for chunk in amps.chunks_mut(2 * m) {
        let (lo, hi) = chunk.split_at_mut(m);
        for (a0, a1) in lo.iter_mut().zip(hi.iter_mut()) {
            let (x0, x1) = (*a0, *a1);
            *a0 = u[0][0] * x0 + u[0][1] * x1;
            *a1 = u[1][0] * x0 + u[1][1] * x1;
        }
    }
}

/// `⟨ψ|σ_β(site)|φ⟩` for β = x, y, z.
pub(crate) fn transition_bloch(psi: &[C64], phi: &[C64], site: usize) -> [C64; 3] {
    let m = 1usize << site;
    let mut out = [C64::new(0.0, 0.0); 3];
    for (pc, fc) in psi.chunks(2 * m).zip(phi.chunks(2 * m)) {
        let (p0, p1) = pc.split_at(m);
        let (f0, f1) = fc.split_at(m);
        for k in 0..m {
            accumulate_transition(&mut out, p0[k], p1[k], f0[k], f1[k]);
        }
    }
    out
}

/// `⟨ψ|σ_β(y)|φ⟩` for every site `y` in a single pass over the amplitudes.
pub(crate) fn transition_bloch_all(psi: &[C64], phi: &[C64], n: usize) -> Vec<[C64; 3]> {
    let mut out = vec![[C64::new(0.0, 0.0); 3]; n];
    for i in 0..psi.len() {
        let (pi, fi) = (psi[i], phi[i]);
        for (y, acc) in out.iter_mut().enumerate() {
            let m = 1usize << y;
            if i & m != 0 {
                continue;
            }
            let j = i | m;
            accumulate_transition(acc, pi, psi[j], fi, phi[j]);
        }
    }
    out
}

#[inline]
fn accumulate_transition(out: &mut [C64; 3], p0: C64, p1: C64, f0: C64, f1: C64) {
    let (c0, c1) = (p0.conj(), p1.conj());
    let a = c0 * f1;
    let b = c1 * f0;
    out[0] += a + b;
    out[1] += C64::new(0.0, -1.0) * a + C64::new(0.0, 1.0) * b;
    out[2] += c0 * f0 - c1 * f1;
}
