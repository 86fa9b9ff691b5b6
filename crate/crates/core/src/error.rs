use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{requested} qubits exceeds the configured cap of {cap}")]
    QubitCap { requested: usize, cap: usize },

    #[error("site {site} out of range for {n_qubits} qubits")]
    SiteOutOfRange { site: usize, n_qubits: usize },

    #[error("matrix is not unitary (deviation {deviation:.3e})")]
    NotUnitary { deviation: f64 },

    #[error("vector norm {norm} is not 1 (|deviation| {deviation:.3e})")]
    NotUnitVector { norm: f64, deviation: f64 },

    #[error("state norm deviates from 1 by {0:.3e}")]
    NotNormalized(f64),

    #[error("qubit count mismatch: {0} vs {1}")]
    SizeMismatch(usize, usize),

    #[error("vanishing branch: outcome {outcome} has probability {probability:.3e}")]
    VanishingBranch { outcome: i8, probability: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("eigensolver did not converge after {iterations} iterations (residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("log of nonpositive sample {value} at N={n}")]
    NonPositiveSample { n: usize, value: f64 },

    #[error("need at least {needed} points for a fit, got {got}")]
    TooFewPoints { needed: usize, got: usize },

    #[error("noise kernel is not positive semidefinite (min eigenvalue {0:.3e})")]
    KernelNotPsd(f64),

    #[error("not in short-time regime: gamma*t*N^2 = {0:.3e} > 0.5")]
    NotShortTime(f64),

    #[error("invalid Shor instance: {0}")]
    InvalidInstance(String),

    #[error("at N={n}: {source}")]
    AtSize {
        n: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn at_size(self, n: usize) -> Self {
        Error::AtSize {
            n,
            source: Box::new(self),
        }
    }

    /// True for errors caused by bad input rather than a numerical failure.
    pub fn is_validation(&self) -> bool {
        match self {
            Error::NoConvergence { .. } | Error::KernelNotPsd(_) | Error::NonPositiveSample { .. } => {
                false
            }
            Error::AtSize { source, .. } => source.is_validation(),
            _ => true,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
