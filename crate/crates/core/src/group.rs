//! The group of unit quaternions: elements, charts, measure, and actions.
//!
//! An element is stored as the complex pair `(alpha, beta)` of its defining
//! 2x2 matrix `[[alpha, -conj(beta)], [beta, conj(alpha)]]` with
//! `|alpha|^2 + |beta|^2 = 1`. Geometrically this is the sphere of radius 2
//! in R^4 (the metric convention used throughout: total volume `16 pi^2`),
//! with quaternion coordinates `(Re alpha, Im alpha, Re beta, Im beta)`.
//!
//! The module provides:
//! - constructors and exact group operations (product, inverse, entrywise
//!   conjugation),
//! - the `zyz` Euler chart `g = g3(phi) g2(theta) g3(psi)` with
//!   `phi in [0, 2pi)`, `theta in [0, pi]`, `psi in [0, 4pi)` and its
//!   branch-stable inverse,
//! - uniform (normalized-volume) sampling via four independent normals,
//! - the fibration onto the Riemann sphere (`alpha/beta`), stereographic
//!   projection, the Moebius action, and the 2-to-1 cover onto rotations,
//!   with the axis conventions fixed so that `g3(psi)` covers the rotation
//!   by `psi` about `e3` and `g2(theta)` the rotation by `theta` about `e2`.

use crate::error::{Error, Result};
use crate::scalar::Real;
use num_complex::Complex;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

/// Unit pair `(alpha, beta)`; see the module docs for the matrix model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Su2Element<T> {
    pub alpha: Complex<T>,
    pub beta: Complex<T>,
}

/// Euler angles of the `zyz` chart. Canonical ranges (produced by
/// [`Su2Element::to_euler`]): `phi in [0, 2pi)`, `theta in [0, pi]`,
/// `psi in [0, 4pi)`. Constructors accept any real values; angles enter
/// only through half-angle phases, so adding `4 pi` to `psi` (or `2 pi`
/// jointly to `phi` and `-2 pi` to `psi`) is invisible.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EulerAngles<T> {
    pub phi: T,
    pub theta: T,
    pub psi: T,
}

/// A point of the Riemann sphere: a finite complex number or infinity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RiemannSpherePoint<T> {
    Finite(Complex<T>),
    Infinity,
}

/// Dense 3x3 real matrix (rotations).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat3<T> {
    pub m: [[T; 3]; 3],
}

impl<T: Real> Su2Element<T> {
    /// Normalize a raw pair onto the group.
    ///
    /// # Errors
    /// [`Error::NearZeroNorm`] when `|alpha|^2 + |beta|^2 <= 1e-30` — such a
    /// pair has no meaningful direction.
    pub fn new(alpha: Complex<T>, beta: Complex<T>) -> Result<Self> {
        let n2 = alpha.norm_sqr() + beta.norm_sqr();
        if n2 <= T::from_f64(1e-30).unwrap() {
            return Err(Error::NearZeroNorm);
        }
        let inv = n2.sqrt().recip();
        Ok(Su2Element {
            alpha: alpha * inv,
            beta: beta * inv,
        })
    }

    /// The identity element `h(1, 0)`.
    pub fn identity() -> Self {
        Su2Element {
            alpha: Complex::new(T::one(), T::zero()),
            beta: Complex::new(T::zero(), T::zero()),
        }
    }

    /// Circle-subgroup element `g3(psi) = h(e^{i psi / 2}, 0)`.
    pub fn g3(psi: T) -> Self {
        let half = psi / (T::one() + T::one());
        Su2Element {
            alpha: Complex::from_polar(T::one(), half),
            beta: Complex::new(T::zero(), T::zero()),
        }
    }

    /// Real rotation factor `g2(theta) = h(cos(theta/2), sin(theta/2))`.
    pub fn g2(theta: T) -> Self {
        let half = theta / (T::one() + T::one());
        Su2Element {
            alpha: Complex::new(half.cos(), T::zero()),
            beta: Complex::new(half.sin(), T::zero()),
        }
    }

    /// Compose the Euler factors `g3(phi) g2(theta) g3(psi)` in closed form:
    /// `alpha = cos(theta/2) e^{i(phi+psi)/2}`,
    /// `beta  = sin(theta/2) e^{i(psi-phi)/2}`.
    pub fn from_euler(e: &EulerAngles<T>) -> Self {
        let two = T::one() + T::one();
        let ht = e.theta / two;
        let sum_half = (e.phi + e.psi) / two;
        let diff_half = (e.psi - e.phi) / two;
        Su2Element {
            alpha: Complex::from_polar(ht.cos(), sum_half),
            beta: Complex::from_polar(ht.sin(), diff_half),
        }
    }

    /// Invert the Euler chart on its canonical ranges.
    ///
    /// Branch: `theta = 2 atan2(|beta|, |alpha|)`; away from the chart's
    /// degenerate circles, `phi = arg alpha - arg beta` reduced into
    /// `[0, 2pi)` and `psi = arg alpha + arg beta` reduced into `[0, 4pi)`,
    /// with the `psi` reduction compensating the `phi` shift (the deck
    /// transformation `(phi, psi) -> (phi + 2pi, psi - 2pi)` fixes the
    /// element, so both shifts must be applied together). For `theta`
    /// within 1e-12 of 0 or pi the convention is `phi = 0` and the whole
    /// phase is carried by `psi`.
    pub fn to_euler(&self) -> EulerAngles<T> {
        let two = T::one() + T::one();
        let eps = T::from_f64(1e-12).unwrap();
        let na = self.alpha.norm();
        let nb = self.beta.norm();
        let theta = two * nb.atan2(na);
        let two_pi = two * T::PI();
        let four_pi = two_pi + two_pi;
        if theta <= eps {
            let psi = mod_into(two * self.alpha.arg(), four_pi);
            return EulerAngles {
                phi: T::zero(),
                theta,
                psi,
            };
        }
        if theta >= T::PI() - eps {
            let psi = mod_into(two * self.beta.arg(), four_pi);
            return EulerAngles {
                phi: T::zero(),
                theta,
                psi,
            };
        }
        let a = self.alpha.arg();
        let b = self.beta.arg();
        let phi_raw = a - b;
        let phi = mod_into(phi_raw, two_pi);
        let shift = phi - phi_raw; // multiple of 2 pi
        let psi = mod_into(a + b - shift, four_pi);
        EulerAngles { phi, theta, psi }
    }

    /// Group product (matrix product of the defining matrices).
    pub fn mul(&self, other: &Self) -> Self {
        Su2Element {
            alpha: self.alpha * other.alpha - self.beta.conj() * other.beta,
            beta: self.beta * other.alpha + self.alpha.conj() * other.beta,
        }
    }

    /// Group inverse (conjugate transpose): `h(conj(alpha), -beta)`.
    pub fn inv(&self) -> Self {
        Su2Element {
            alpha: self.alpha.conj(),
            beta: -self.beta,
        }
    }

    /// Entrywise complex conjugation of the defining matrix:
    /// `h(conj(alpha), conj(beta))`.
    pub fn conj_entries(&self) -> Self {
        Su2Element {
            alpha: self.alpha.conj(),
            beta: self.beta.conj(),
        }
    }

    /// The antipode `-g = h(-alpha, -beta)` (same image in the rotation group).
    pub fn neg(&self) -> Self {
        Su2Element {
            alpha: -self.alpha,
            beta: -self.beta,
        }
    }

    /// Sup distance between defining pairs — the test metric for elements.
    pub fn distance(&self, other: &Self) -> T {
        let da = (self.alpha - other.alpha).norm();
        let db = (self.beta - other.beta).norm();
        if da > db {
            da
        } else {
            db
        }
    }

    /// `|alpha|^2 + |beta|^2 - 1`, for invariant checks.
    pub fn norm_defect(&self) -> T {
        (self.alpha.norm_sqr() + self.beta.norm_sqr() - T::one()).abs()
    }
}

/// Reduce `x` into `[0, m)` (robust against rounding at the seam).
fn mod_into<T: Real>(x: T, m: T) -> T {
    let mut r = x - m * (x / m).floor();
    if r >= m {
        r -= m;
    }
    if r < T::zero() {
        r += m;
    }
    r
}

/// Draw a uniform (Haar, normalized volume) element: four independent
/// standard normals, normalized. Resamples in the measure-zero event that
/// the draw is too small to normalize.
pub fn haar_sample<T, R>(rng: &mut R) -> Su2Element<T>
where
    T: Real,
    R: Rng + ?Sized,
    StandardNormal: Distribution<T>,
{
    loop {
        let x0: T = StandardNormal.sample(rng);
        let y0: T = StandardNormal.sample(rng);
        let x1: T = StandardNormal.sample(rng);
        let y1: T = StandardNormal.sample(rng);
        if let Ok(g) = Su2Element::new(Complex::new(x0, y0), Complex::new(x1, y1)) {
            return g;
        }
    }
}

/// Fibration onto the Riemann sphere: `h(alpha, beta) -> alpha / beta`,
/// with `beta = 0` mapping to infinity. Constant along right translation
/// by the circle subgroup (both entries pick up the same phase).
pub fn hopf_project<T: Real>(g: &Su2Element<T>) -> RiemannSpherePoint<T> {
    if g.beta.norm_sqr() == T::zero() {
        RiemannSpherePoint::Infinity
    } else {
        RiemannSpherePoint::Finite(g.alpha / g.beta)
    }
}

/// Moebius action on the Riemann sphere in homogeneous coordinates:
/// `z -> (alpha z0 - conj(beta) z1) / (beta z0 + conj(alpha) z1)` for
/// `z = z0/z1`, with infinity as `(1, 0)`.
pub fn moebius_apply<T: Real>(
    g: &Su2Element<T>,
    p: &RiemannSpherePoint<T>,
) -> RiemannSpherePoint<T> {
    let (z0, z1) = match p {
        RiemannSpherePoint::Finite(z) => (*z, Complex::new(T::one(), T::zero())),
        RiemannSpherePoint::Infinity => (
            Complex::new(T::one(), T::zero()),
            Complex::new(T::zero(), T::zero()),
        ),
    };
    let num = g.alpha * z0 - g.beta.conj() * z1;
    let den = g.beta * z0 + g.alpha.conj() * z1;
    if den.norm_sqr() == T::zero() {
        RiemannSpherePoint::Infinity
    } else {
        RiemannSpherePoint::Finite(num / den)
    }
}

/// Stereographic projection from the unit 2-sphere (north pole `e3` to
/// infinity): `(x, y, t) -> (x + i y) / (1 - t)`.
pub fn stereographic<T: Real>(p: &[T; 3]) -> RiemannSpherePoint<T> {
    let one_minus_t = T::one() - p[2];
    if one_minus_t == T::zero() {
        RiemannSpherePoint::Infinity
    } else {
        RiemannSpherePoint::Finite(Complex::new(p[0], p[1]) / one_minus_t)
    }
}

/// Inverse stereographic projection onto the unit 2-sphere.
pub fn stereographic_inv<T: Real>(z: &RiemannSpherePoint<T>) -> [T; 3] {
    match z {
        RiemannSpherePoint::Infinity => [T::zero(), T::zero(), T::one()],
        RiemannSpherePoint::Finite(z) => {
            let n2 = z.norm_sqr();
            let denom = T::one() + n2;
            let two = T::one() + T::one();
            [
                two * z.re / denom,
                two * z.im / denom,
                (n2 - T::one()) / denom,
            ]
        }
    }
}

/// Chordal distance between Riemann-sphere points: the Euclidean distance
/// of their inverse stereographic images.
pub fn chordal_distance<T: Real>(a: &RiemannSpherePoint<T>, b: &RiemannSpherePoint<T>) -> T {
    let pa = stereographic_inv(a);
    let pb = stereographic_inv(b);
    let mut s = T::zero();
    for i in 0..3 {
        let d = pa[i] - pb[i];
        s += d * d;
    }
    s.sqrt()
}

/// The 2-to-1 cover onto rotations of the unit 2-sphere, in the closed
/// quaternion form. The quaternion components in the rotation basis are
/// `(w, q1, q2, q3) = (Re alpha, Im beta, Re beta, Im alpha)`, chosen so
/// that the rotation agrees with the Moebius action transported through
/// stereographic projection: `g3(psi)` maps to the rotation by `psi` about
/// `e3` and `g2(theta)` to the rotation by `theta` about `e2`. Both `g`
/// and `-g` map to the same rotation.
pub fn so3_from_su2<T: Real>(g: &Su2Element<T>) -> Mat3<T> {
    let w = g.alpha.re;
    let q1 = g.beta.im;
    let q2 = g.beta.re;
    let q3 = g.alpha.im;
    let two = T::one() + T::one();
    let one = T::one();
    Mat3 {
        m: [
            [
                one - two * (q2 * q2 + q3 * q3),
                two * (q1 * q2 - q3 * w),
                two * (q1 * q3 + q2 * w),
            ],
            [
                two * (q1 * q2 + q3 * w),
                one - two * (q1 * q1 + q3 * q3),
                two * (q2 * q3 - q1 * w),
            ],
            [
                two * (q1 * q3 - q2 * w),
                two * (q2 * q3 + q1 * w),
                one - two * (q1 * q1 + q2 * q2),
            ],
        ],
    }
}

impl<T: Real> Mat3<T> {
    pub fn identity() -> Self {
        let o = T::one();
        let z = T::zero();
        Mat3 {
            m: [[o, z, z], [z, o, z], [z, z, o]],
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = [[T::zero(); 3]; 3];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, entry) in row.iter_mut().enumerate() {
                let mut acc = T::zero();
                for k in 0..3 {
                    acc += self.m[i][k] * other.m[k][j];
                }
                *entry = acc;
            }
        }
        Mat3 { m: out }
    }

    pub fn mul_vec(&self, v: &[T; 3]) -> [T; 3] {
        let mut out = [T::zero(); 3];
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.m[i][0] * v[0] + self.m[i][1] * v[1] + self.m[i][2] * v[2];
        }
        out
    }

    /// Largest entrywise difference.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        let mut d = T::zero();
        for i in 0..3 {
            for j in 0..3 {
                let e = (self.m[i][j] - other.m[i][j]).abs();
                if e > d {
                    d = e;
                }
            }
        }
        d
    }
}
