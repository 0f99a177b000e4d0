//! Harmonic analysis and random fields on the special unitary group SU(2),
//! carried as the radius-2 round 3-sphere (volume `16 pi^2`).
//!
//! The crate provides, layer by layer:
//!
//! - [`group`]: the group itself — elements `h(alpha, beta)`, Euler angles,
//!   Haar sampling, the Hopf fibration onto the Riemann sphere, and the
//!   double cover onto rotations of 3-space;
//! - [`wigner`]: irreducible unitary representations — Wigner matrices
//!   `D^l` for half-integer degrees `l <= 32`, evaluated from the monomial
//!   closed form with compensated arithmetic, plus the matching normalized
//!   (hyperspherical) and spin-weighted harmonics;
//! - [`grid`]: a product quadrature grid exact on products of two basis
//!   functions up to a band limit, with the exactness gate run at
//!   construction;
//! - [`transform`]: forward/inverse band-limited transforms, exact spectral
//!   Laplacian multipliers (full, vertical, horizontal, spin), spin
//!   projections, and spin measures of a single field;
//! - [`fields`]: invariant Gaussian generators, Haar-rotation
//!   invariantization, spin-measure realization;
//! - [`mc`]: Monte Carlo estimators with deterministic substreams and the
//!   closed-form/quadrature oracles they are checked against;
//! - [`io`]: CSV/JSON serialization for every artifact, bit-exact across
//!   write/read cycles.
//!
//! Scalar genericity: all numerics are generic over [`scalar::Real`]
//! (implemented for `f32` and `f64`); the crate root exports concrete `f64`
//! aliases for the common types. File I/O is pinned to `f64`.
//!
//! Index convention: degrees and labels are half-integers stored as doubled
//! integers (`two_ell = 2l`, `two_m = 2m`, `two_s = 2s`), with `|m|, |s| <= l`
//! and `l - m, l - s` integral. Matrix rows are labeled by `m` ascending,
//! columns by `s` ascending.

pub mod error;
pub mod fields;
pub mod grid;
pub mod group;
pub mod half;
pub mod io;
pub mod linalg;
pub mod mc;
pub mod scalar;
pub mod transform;
pub mod wigner;

pub use error::{Error, Result};

/// SU(2) element over `f64`.
pub type Su2 = group::Su2Element<f64>;
/// Euler angles over `f64`.
pub type Euler = group::EulerAngles<f64>;
/// Wigner matrix over `f64`.
pub type Wigner = wigner::WignerMatrix<f64>;
/// Quadrature grid over `f64`.
pub type Grid = grid::QuadratureGrid<f64>;
/// Band-limited coefficient set over `f64`.
pub type Coefficients = transform::SpectralCoefficients<f64>;
/// Dense complex matrix over `f64`.
pub type Matrix = linalg::CMatrix<f64>;
/// Covariance specification over `f64`.
pub type Covariance = fields::CovarianceSpec<f64>;
/// Spin measure over `f64`.
pub type Measure = fields::SpinMeasure<f64>;
