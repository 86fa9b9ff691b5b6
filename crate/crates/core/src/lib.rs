//! Macroscopic entanglement in finite N-qubit pure states.
//!
//! The crate measures whether a pure state is entangled *macroscopically*,
//! using two related diagnostics:
//!
//! * the **fluctuation index** `p`, defined by how the largest variance of an
//!   additive operator `A = Σ_x a(x)` (with `‖a(x)‖ = 1`) scales with the
//!   number of qubits, `sup ⟨(ΔA)²⟩ = O(N^p)`. Normally-fluctuating states
//!   (NFS) have `p = 1`; anomalously-fluctuating states (AFS) have `p = 2`.
//! * the finite-size **cluster property**: whether correlations of local
//!   fluctuations decay outside a region `Ω(ε)` whose size does not grow with `N`.
//!
//! Around these it provides the stability experiments tied to them: the
//! disturbance of distant observables by a local projective measurement,
//! iterated measurement until the cluster property is restored, decoherence
//! rates under spatially correlated dephasing noise, and probes of the
//! intermediate states of Shor's algorithm.
//!
//! | module | contents |
//! |---|---|
//! | [`statevec`] | dense statevector kernel, gates, measurements |
//! | [`stategen`] | cat, W, Bell-pair, Dicke, random and Ising ground states |
//! | [`correlator`] | covariance matrix, maximal fluctuation, pair strength, Mermin value |
//! | [`scaling`] | sweeps over N, log–log fits, Ω(ε), classification |
//! | [`stability`] | measurement disturbance and iterated reduction |
//! | [`decoherence`] | noise models, perturbative and Monte Carlo decay rates |
//! | [`shor`] | Shor-stage states, success probability, noisy stage reports |
//! | [`experiment`] | experiment specs and CSV/JSON reports behind the CLI |
//! | [`cli`] | argument parsing for the `macroent` binary |

pub mod cli;
pub mod correlator;
pub mod decoherence;
pub mod eigen;
pub mod error;
pub mod experiment;
pub mod scaling;
pub mod seeds;
pub mod shor;
pub mod stability;
pub mod stategen;
pub mod statevec;

pub use correlator::{build_vcm, max_fluctuation, mermin_value, pair_strength, CovarianceMatrix, FluctuationResult, Method};
pub use error::{Error, Result};
pub use stategen::StateFamily;
pub use statevec::{fidelity, Geometry, SiteOperator, StateVector};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
