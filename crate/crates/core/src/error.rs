use std::io;

use thiserror::Error;

/// Errors raised by the numerics kernel, the samplers and the experiment harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("dimension {dim} exceeds the dense cap of {cap}")]
    DimensionTooLarge { dim: usize, cap: usize },

    #[error("matrix is not Hermitian (max deviation {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:e})")]
    NotPsd { min_eigenvalue: f64 },

    #[error("Hermitian eigensolver produced non-finite values")]
    EigenSolver,

    #[error("density matrix trace is {trace}, expected 1")]
    NotNormalized { trace: f64 },

    #[error("site index {site} out of range 1..={n}")]
    SiteOutOfRange { site: usize, n: usize },

    #[error("correlator needs two distinct sites, got i = j = {0}")]
    SameSite(usize),

    #[error("qubit count {0} is not supported here")]
    QubitCount(usize),

    #[error("charge {q} out of range 0..={n}")]
    ChargeOutOfRange { q: usize, n: usize },

    #[error("rank {0} is not a power of two")]
    RankNotPowerOfTwo(usize),

    #[error("rank {rank} exceeds the available dimension {dim}")]
    RankTooLarge { rank: usize, dim: usize },

    #[error("acceptance probability {0:e} is too small to renormalize")]
    DegenerateProjection(f64),

    #[error("postselection did not hit the target charge after {0} attempts")]
    PostselectionExhausted(usize),

    #[error("operator is not unitary; the fidelity correlator is undefined for it")]
    NonUnitaryOperator,

    #[error("operator is not a generalized permutation (more than one entry in a row or column)")]
    NotMonomial,

    #[error("purity {0:e} is too small for the Renyi-2 correlator")]
    VanishingPurity(f64),

    #[error("correlator has imaginary part {0:e}")]
    ComplexCorrelator(f64),

    #[error("permutation degree {0} exceeds the supported maximum of 6")]
    DegreeTooLarge(usize),

    #[error("Weingarten table needs d >= k (got d = {d}, k = {k})")]
    DimensionBelowDegree { d: usize, k: usize },

    #[error("Weingarten bound check requires d >= 4k^2 (got d = {d}, k = {k})")]
    OutsideBoundRegime { d: usize, k: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
