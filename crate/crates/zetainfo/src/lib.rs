//! Quantum information matrices from spectral ζ-kernels.
//!
//! Computes quantum generalizations of the Fisher information matrix
//! (Kubo-Mori, RLD, α-z, Petz, sandwiched) for parameterized families of
//! density matrices, cross-validates every closed form against
//! finite-difference Hessians of the underlying divergences, and provides
//! closed-form machinery for thermal (quantum Boltzmann machine) and
//! time-evolved families, including the associated probability densities.

pub mod config;
pub mod densities;
pub mod divergences;
pub mod families;
pub mod infomat;
pub mod kernels;
pub mod matcore;
pub mod quad;
pub mod structured;
pub mod verify;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not Hermitian (asymmetry {0:.3e})")]
    NotHermitian(f64),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("value outside function domain: {0}")]
    Domain(String),
    #[error("state validation failed: {0}")]
    InvalidState(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("quadrature failed to converge: achieved error {achieved:.3e}, requested {requested:.3e}")]
    QuadratureFailure { achieved: f64, requested: f64 },
    #[error("configuration error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
