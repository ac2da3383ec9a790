use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid cut: {0}")]
    InvalidCut(String),

    #[error("eigenvalue iteration did not converge after {sweeps} sweeps (off-diagonal norm {off:e})")]
    NoConvergence { sweeps: usize, off: f64 },

    #[error("system too large: {n_sites} sites exceeds the cap of {cap}")]
    TooLarge { n_sites: usize, cap: usize },

    #[error("value out of domain: {0}")]
    Domain(String),

    #[error("invalid lattice: {0}")]
    Lattice(String),

    #[error("collapse/revival detection inconclusive: {0}")]
    Inconclusive(String),
}

pub type Result<T> = std::result::Result<T, Error>;
