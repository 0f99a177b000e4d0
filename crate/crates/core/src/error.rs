//! Error types shared across the crate.

use thiserror::Error;

/// Errors produced by construction, validation, and transform routines.
#[derive(Debug, Error)]
pub enum Error {
    /// A group element was constructed from a pair whose norm is too small
    /// to normalize reliably (pre-normalization norm ≤ 1e-30).
    #[error("pair norm too small to normalize (|alpha|^2 + |beta|^2 <= 1e-30)")]
    NearZeroNorm,

    /// A (degree, row, column) index triple violates the half-integer index
    /// constraints: degrees are non-negative, |row| and |column| are bounded
    /// by the degree, and both differ from the degree by whole integers.
    #[error("invalid index triple: two_ell={two_ell}, two_m={two_m}, two_s={two_s}")]
    InvalidIndex {
        two_ell: i32,
        two_m: i32,
        two_s: i32,
    },

    /// A requested degree exceeds the supported band-limit cap.
    #[error("band limit exceeded: two_ell={two_ell} > cap {cap}")]
    BandLimitExceeded { two_ell: i32, cap: i32 },

    /// The quadrature grid failed its construction-time orthonormality
    /// self-check.
    #[error("quadrature exactness gate failed: {detail}")]
    ExactnessGateFailed { detail: String },

    /// A covariance matrix is not positive semidefinite within tolerance
    /// (an eigenvalue is below -1e-10 times the trace).
    #[error("covariance not positive semidefinite: min eigenvalue {min_eigenvalue} (trace {trace})")]
    NotPositiveSemidefinite { min_eigenvalue: f64, trace: f64 },

    /// A spectral-measure computation received an identically zero field.
    #[error("spin measures are undefined for the zero field")]
    ZeroField,

    /// A configuration or file input is structurally invalid.
    #[error("invalid spec: {0}")]
    InvalidSpec(String),

    /// Underlying I/O failure (file output paths).
    #[error(transparent)]
    Io(#[from] std::io::Error),

    /// JSON (de)serialization failure.
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
