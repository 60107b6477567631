// SPDX-License-Identifier: Apache-2.0

use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Failure categories surfaced by the analysis pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid structure constants: {0}")]
    InvalidConstants(String),

    #[error("channel count must be even and positive, got {0}")]
    OddChannelCount(usize),

    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    #[error("matrix is not symmetric (residual {residual:.3e})")]
    NotSymmetric { residual: f64 },

    #[error("matrix is not positive definite (min eigenvalue {min_eigenvalue:.3e})")]
    NotPositiveDefinite { min_eigenvalue: f64 },

    #[error("drift matrix is not Hurwitz: spectral abscissa {abscissa:.6e} at eigenvalue {eigenvalue}")]
    NotHurwitz { abscissa: f64, eigenvalue: Complex64 },

    #[error("eigenfrequencies {j} and {k} coincide ({omega_j:.6e} vs {omega_k:.6e})")]
    RepeatedFrequency {
        j: usize,
        k: usize,
        omega_j: f64,
        omega_k: f64,
    },

    #[error("parameter out of admissible range: {0}")]
    OutOfRange(String),

    #[error("capability limit: {0}")]
    Capability(String),

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    #[error("configuration error: {0}")]
    Schema(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Schema(_) | Error::Io(_) => 2,
            Error::Capability(_) => 3,
            _ => 4,
        }
    }
}
