//! Wigner matrices of the unit-quaternion group in the monomial basis.
//!
//! The degree-`ell` representation acts on homogeneous polynomials of degree
//! `2 ell` in two complex variables, with orthonormal basis the rescaled
//! monomials `psi^ell_m(z) = binom(2l, l+m)^{1/2} z0^{l+m} z1^{l-m}`. Matching
//! the `z0^{l+m} z1^{l-m}` coefficient of the translated monomial gives the
//! closed form implemented here:
//!
//! ```text
//! D^l_{m,s}(h(a, b)) = sqrt(binom(2l, l-s) / binom(2l, l+m))
//!     * sum_k binom(l+s, l+m-k) binom(l-s, k)
//!             conj(a)^{l+m-k} conj(b)^{s-m+k} (-b)^k a^{l-s-k}
//! ```
//!
//! with `k` running over all integers keeping every exponent nonnegative.
//! Rows are indexed by `m` ascending from `-l` to `l`, columns by `s`
//! ascending — the degree-1/2 matrix is `[[a, conj(b)], [-b, conj(a)]]` in
//! that layout.
//!
//! # Numerical strategy
//!
//! Every term factors as a *common* unimodular phase times a real magnitude:
//! writing `a = ra e^{i ta}`, `b = rb e^{i tb}`, the phase of each summand is
//! `exp(i(-(m+s) ta + (m-s) tb))` independently of `k`. The evaluator
//! therefore accumulates a purely real alternating sum of positive terms and
//! applies one phase at the end. The alternating sum cancels catastrophically
//! at large degree (~9 decimal digits at `2l = 64`), so it is accumulated in
//! double-double arithmetic with the binomial products formed exactly in
//! `u128`; the result carries roughly full `f64` accuracy through `2l = 64`,
//! where unitarity must hold to 1e-10.
//!
//! The same routine evaluated at a *non-unit* pair is the homogeneous
//! polynomial extension to R^4 (degree `2l`, harmonic — see
//! [`ambient_laplacian_fd_defect`]).

use crate::error::{Error, Result};
use crate::group::Su2Element;
use crate::half::{check_degree, check_indices, dim, labels, offset};
use crate::linalg::CMatrix;
use crate::scalar::{BinomialTable, Dd, Real};
use num_complex::Complex;
use std::sync::OnceLock;

/// Hard band-limit cap: degrees `2l <= 64` are supported. Beyond this the
/// exact `u128` binomial products would need wider integers.
pub const BAND_LIMIT_CAP: i32 = 64;

fn binomials() -> &'static BinomialTable {
    static TABLE: OnceLock<BinomialTable> = OnceLock::new();
    TABLE.get_or_init(|| BinomialTable::new(BAND_LIMIT_CAP as usize))
}

/// Dense Wigner matrix `D^l(g)` with rows indexed by `m` ascending and
/// columns by `s` ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct WignerMatrix<T> {
    pub two_ell: i32,
    pub entries: CMatrix<T>,
}

impl<T: Real> WignerMatrix<T> {
    /// Entry lookup by doubled index labels.
    pub fn get(&self, two_m: i32, two_s: i32) -> Complex<T> {
        self.entries[(
            offset(self.two_ell, two_m),
            offset(self.two_ell, two_s),
        )]
    }

    /// `max |D D^dagger - I|` — zero for an exactly unitary matrix.
    pub fn unitarity_defect(&self) -> T {
        self.entries.unitarity_defect()
    }

    /// Determinant (the matrix is unitary, so this lies on the unit circle).
    pub fn det(&self) -> Complex<T> {
        self.entries.det()
    }
}

/// The antidiagonal sign matrix `eps(l)_{m,m'} = delta_{-m,m'} (-1)^{l-m}`,
/// stored dense with the same ascending layout as [`WignerMatrix`]. Its
/// square is `(-1)^{2l}` times the identity.
#[derive(Debug, Clone, PartialEq)]
pub struct EpsilonMatrix<T> {
    pub two_ell: i32,
    pub entries: CMatrix<T>,
}

/// Sign entry of `eps(l)` as an exact integer: `delta_{-m,m'} (-1)^{l-m}`
/// (0 when `m' != -m`).
pub fn epsilon_sign(two_ell: i32, two_m: i32, two_mp: i32) -> i32 {
    if two_mp != -two_m {
        return 0;
    }
    // l - m is a nonnegative integer: (two_ell - two_m) / 2.
    if ((two_ell - two_m) / 2) % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Build `eps(l)` as a dense matrix.
pub fn epsilon_matrix<T: Real>(two_ell: i32) -> Result<EpsilonMatrix<T>> {
    check_degree(two_ell)?;
    let n = dim(two_ell);
    let mut entries = CMatrix::zeros(n, n);
    for two_m in labels(two_ell) {
        let sign = epsilon_sign(two_ell, two_m, -two_m);
        entries[(offset(two_ell, two_m), offset(two_ell, -two_m))] =
            Complex::new(T::from_i32_exact(sign), T::zero());
    }
    Ok(EpsilonMatrix { two_ell, entries })
}

/// Rescaled monomial `psi^l_m(z) = binom(2l, l+m)^{1/2} z0^{l+m} z1^{l-m}`.
pub fn monomial_eval<T: Real>(
    two_ell: i32,
    two_m: i32,
    z0: Complex<T>,
    z1: Complex<T>,
) -> Result<Complex<T>> {
    check_indices(two_ell, two_m, two_m)?;
    let lp = ((two_ell + two_m) / 2) as usize;
    let lm = ((two_ell - two_m) / 2) as usize;
    let coeff = Dd::<T>::from_u128(binomials().get(two_ell, lp as i32))
        .sqrt()
        .to_scalar();
    let mut acc = Complex::new(coeff, T::zero());
    for _ in 0..lp {
        acc *= z0;
    }
    for _ in 0..lm {
        acc *= z1;
    }
    Ok(acc)
}

/// Polar pieces of a complex pair: moduli and arguments.
struct Polar<T> {
    ra: T,
    rb: T,
    ta: T,
    tb: T,
}

fn polar<T: Real>(alpha: Complex<T>, beta: Complex<T>) -> Polar<T> {
    Polar {
        ra: alpha.norm(),
        rb: beta.norm(),
        ta: alpha.arg(),
        tb: beta.arg(),
    }
}

/// Double-double power tables `r^0 .. r^max_pow`.
fn power_table<T: Real>(r: T, max_pow: usize) -> Vec<Dd<T>> {
    let mut t = Vec::with_capacity(max_pow + 1);
    let rd = Dd::from_scalar(r);
    let mut cur = Dd::from_scalar(T::one());
    t.push(cur);
    for _ in 0..max_pow {
        cur = cur * rd;
        t.push(cur);
    }
    t
}

/// The real alternating k-sum times the prefactor, for one `(m, s)`.
/// `ra_pow`/`rb_pow` must extend to exponent `2l`.
fn real_ksum<T: Real>(
    two_ell: i32,
    two_m: i32,
    two_s: i32,
    ra_pow: &[Dd<T>],
    rb_pow: &[Dd<T>],
) -> T {
    let tbl = binomials();
    let l_plus_s = (two_ell + two_s) / 2;
    let l_minus_s = (two_ell - two_s) / 2;
    let l_plus_m = (two_ell + two_m) / 2;
    let l_minus_m = (two_ell - two_m) / 2;
    let md = (two_m - two_s) / 2; // m - s, an integer
    let k_lo = md.max(0);
    let k_hi = l_minus_s.min(l_plus_m);
    let mut acc = Dd::<T>::zero();
    for k in k_lo..=k_hi {
        // Exact in u128: each factor <= binom(64, 32) < 2^61.
        let prod = tbl.get(l_plus_s, l_plus_m - k) * tbl.get(l_minus_s, k);
        let e_ra = (two_ell + md - 2 * k) as usize;
        let e_rb = (2 * k - md) as usize;
        let term = Dd::from_u128(prod) * ra_pow[e_ra] * rb_pow[e_rb];
        acc = if k % 2 == 1 { acc - term } else { acc + term };
    }
    let num = Dd::<T>::from_u128(tbl.get(two_ell, l_minus_s));
    let den = Dd::<T>::from_u128(tbl.get(two_ell, l_minus_m));
    (acc * (num / den).sqrt()).to_scalar()
}

fn entry_from_polar<T: Real>(
    two_ell: i32,
    two_m: i32,
    two_s: i32,
    p: &Polar<T>,
    ra_pow: &[Dd<T>],
    rb_pow: &[Dd<T>],
) -> Complex<T> {
    let magnitude = real_ksum(two_ell, two_m, two_s, ra_pow, rb_pow);
    let ca = T::from_i32_exact(-(two_m + two_s) / 2);
    let cb = T::from_i32_exact((two_m - two_s) / 2);
    let angle = ca * p.ta + cb * p.tb;
    Complex::from_polar(T::one(), angle) * magnitude
}

/// Evaluate one entry of the degree-`2l` homogeneous extension at an
/// arbitrary (not necessarily unit) complex pair. On the unit sphere this is
/// `D^l_{m,s}`; off it, the harmonic polynomial `\hat D^l_{m,s}` on R^4.
pub fn wigner_entry_general<T: Real>(
    two_ell: i32,
    two_m: i32,
    two_s: i32,
    alpha: Complex<T>,
    beta: Complex<T>,
) -> Result<Complex<T>> {
    check_indices(two_ell, two_m, two_s)?;
    if two_ell > BAND_LIMIT_CAP {
        return Err(Error::BandLimitExceeded {
            two_ell,
            cap: BAND_LIMIT_CAP,
        });
    }
    let p = polar(alpha, beta);
    let ra_pow = power_table(p.ra, two_ell as usize);
    let rb_pow = power_table(p.rb, two_ell as usize);
    Ok(entry_from_polar(two_ell, two_m, two_s, &p, &ra_pow, &rb_pow))
}

/// Evaluate one entry at a group element.
pub fn wigner_entry<T: Real>(
    two_ell: i32,
    two_m: i32,
    two_s: i32,
    g: &Su2Element<T>,
) -> Result<Complex<T>> {
    wigner_entry_general(two_ell, two_m, two_s, g.alpha, g.beta)
}

/// The full matrix `D^l(g)`.
///
/// # Errors
/// [`Error::BandLimitExceeded`] above `2l = 64`; [`Error::InvalidIndex`] on a
/// negative degree.
pub fn wigner_matrix<T: Real>(two_ell: i32, g: &Su2Element<T>) -> Result<WignerMatrix<T>> {
    check_degree(two_ell)?;
    if two_ell > BAND_LIMIT_CAP {
        return Err(Error::BandLimitExceeded {
            two_ell,
            cap: BAND_LIMIT_CAP,
        });
    }
    let p = polar(g.alpha, g.beta);
    let ra_pow = power_table(p.ra, two_ell as usize);
    let rb_pow = power_table(p.rb, two_ell as usize);
    let n = dim(two_ell);
    let mut entries = CMatrix::zeros(n, n);
    for two_m in labels(two_ell) {
        for two_s in labels(two_ell) {
            entries[(offset(two_ell, two_m), offset(two_ell, two_s))] =
                entry_from_polar(two_ell, two_m, two_s, &p, &ra_pow, &rb_pow);
        }
    }
    Ok(WignerMatrix { two_ell, entries })
}

/// Closed form on the diagonal circle subgroup:
/// `D^l_{m,s}(g3(psi)) = delta_{m,s} e^{-i s psi}`.
pub fn wigner_entry_at_g3<T: Real>(
    two_ell: i32,
    two_m: i32,
    two_s: i32,
    psi: T,
) -> Result<Complex<T>> {
    check_indices(two_ell, two_m, two_s)?;
    if two_m != two_s {
        return Ok(Complex::new(T::zero(), T::zero()));
    }
    let two = T::one() + T::one();
    let angle = -T::from_i32_exact(two_s) * psi / two;
    Ok(Complex::from_polar(T::one(), angle))
}

/// Maximum defect of the two conjugation identities
/// `conj(D^l_{m,s}(g)) = D^l_{m,s}(conj g)` and
/// `conj(D^l_{m,s}(g)) = (-1)^{m-s} D^l_{-m,-s}(g)`
/// over all `(m, s)` at the given element.
pub fn symmetry_check<T: Real>(two_ell: i32, g: &Su2Element<T>) -> Result<T> {
    let d = wigner_matrix(two_ell, g)?;
    let d_conj_arg = wigner_matrix(two_ell, &g.conj_entries())?;
    let mut worst = T::zero();
    for two_m in labels(two_ell) {
        for two_s in labels(two_ell) {
            let lhs = d.get(two_m, two_s).conj();
            let e1 = (lhs - d_conj_arg.get(two_m, two_s)).norm();
            let sign = if ((two_m - two_s) / 2) % 2 == 0 {
                T::one()
            } else {
                -T::one()
            };
            let e2 = (lhs - d.get(-two_m, -two_s) * sign).norm();
            worst = worst.max(e1).max(e2);
        }
    }
    Ok(worst)
}

/// `D^l(g2(theta))` — the real rotation matrices ("little-d"). All entries
/// are real; callers may check `max_imag_part`.
pub fn little_d<T: Real>(two_ell: i32, theta: T) -> Result<WignerMatrix<T>> {
    wigner_matrix(two_ell, &Su2Element::g2(theta))
}

/// Largest `|Im|` over the entries (realness diagnostic for little-d).
pub fn max_imag_part<T: Real>(m: &WignerMatrix<T>) -> T {
    let mut worst = T::zero();
    for v in m.entries.as_slice() {
        worst = worst.max(v.im.abs());
    }
    worst
}

/// Hyperspherical harmonic `phi^l_{m,s} = (sqrt(2l+1) / (16 pi^2)^{1/2})^2`…
/// concretely `(sqrt(2l+1) / (4 pi)) D^l_{m,s}`: the orthonormal basis of
/// L^2 for the unnormalized volume `16 pi^2`.
pub fn normalized_harmonic<T: Real>(
    two_ell: i32,
    two_m: i32,
    two_s: i32,
    g: &Su2Element<T>,
) -> Result<Complex<T>> {
    let d = wigner_entry(two_ell, two_m, two_s, g)?;
    Ok(d * harmonic_scale::<T>(two_ell))
}

/// The scale `sqrt(2l+1) / (4 pi)` relating `D` to the orthonormal `phi`.
pub fn harmonic_scale<T: Real>(two_ell: i32) -> T {
    let dim_t = T::from_i32_exact(two_ell + 1);
    let four_pi = T::from_i32_exact(4) * T::PI();
    dim_t.sqrt() / four_pi
}

/// Spin-weighted harmonic `Y^l_{m,s} = sqrt((2l+1) / (4 pi)) D^l_{m,s}` —
/// the sphere-normalized variant.
pub fn spin_weighted_harmonic<T: Real>(
    two_ell: i32,
    two_m: i32,
    two_s: i32,
    g: &Su2Element<T>,
) -> Result<Complex<T>> {
    let d = wigner_entry(two_ell, two_m, two_s, g)?;
    let dim_t = T::from_i32_exact(two_ell + 1);
    let four_pi = T::from_i32_exact(4) * T::PI();
    Ok(d * (dim_t / four_pi).sqrt())
}

/// Relative finite-difference defect of the ambient 4-dimensional Laplacian
/// of the homogeneous extension `\hat D^l_{m,s}` at an arbitrary point
/// `x in R^4` (coordinates `(Re a, Im a, Re b, Im b)`).
///
/// Central second differences with step `h` in each of the four coordinates;
/// the defect is `|sum_i d2_i f|` divided by the natural scale
/// `sum_i (|f(x+h e_i)| + |f(x-h e_i)| + 2|f(x)|) / h^2`, so an exactly
/// harmonic polynomial scores ~1e-11 (pure roundoff + O(h^2) truncation of
/// zero) and a non-harmonic one scores O(1).
pub fn ambient_laplacian_fd_defect<T: Real>(
    two_ell: i32,
    two_m: i32,
    two_s: i32,
    x: [T; 4],
    h: T,
) -> Result<T> {
    let eval = |y: [T; 4]| -> Result<Complex<T>> {
        wigner_entry_general(
            two_ell,
            two_m,
            two_s,
            Complex::new(y[0], y[1]),
            Complex::new(y[2], y[3]),
        )
    };
    let f0 = eval(x)?;
    let mut lap = Complex::new(T::zero(), T::zero());
    let mut scale = T::zero();
    let two = T::one() + T::one();
    for i in 0..4 {
        let mut xp = x;
        xp[i] += h;
        let mut xm = x;
        xm[i] -= h;
        let fp = eval(xp)?;
        let fm = eval(xm)?;
        lap += fp + fm - f0 * two;
        scale += fp.norm() + fm.norm() + two * f0.norm();
    }
    // Both numerator and scale carry the common 1/h^2; it cancels.
    Ok(lap.norm() / scale)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::haar_sample;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    type C = Complex<f64>;

    fn c(re: f64, im: f64) -> C {
        C::new(re, im)
    }

    #[test]
    fn degree_zero_is_one() {
        let g = Su2Element::new(c(0.6, 0.0), c(0.0, 0.8)).unwrap();
        let d = wigner_matrix(0, &g).unwrap();
        assert_eq!(d.entries.rows(), 1);
        assert!((d.get(0, 0) - c(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn degree_half_reproduces_defining_pair() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let g: Su2Element<f64> = haar_sample(&mut rng);
            let d = wigner_matrix(1, &g).unwrap();
            assert!((d.get(1, 1) - g.alpha.conj()).norm() < 1e-14);
            assert!((d.get(-1, 1) - g.beta.conj()).norm() < 1e-14);
            assert!((d.get(1, -1) + g.beta).norm() < 1e-14);
            assert!((d.get(-1, -1) - g.alpha).norm() < 1e-14);
        }
    }

    #[test]
    fn monomial_examples() {
        let one = monomial_eval(0, 0, c(0.3, 0.4), c(-2.0, 0.1)).unwrap();
        assert!((one - c(1.0, 0.0)).norm() < 1e-15);
        let z0 = c(0.3, 0.4);
        let v = monomial_eval(1, 1, z0, c(9.0, -1.0)).unwrap();
        assert!((v - z0).norm() < 1e-15);
        let v = monomial_eval(2, 0, c(1.0, 0.0), c(1.0, 0.0)).unwrap();
        assert!((v - c(2.0f64.sqrt(), 0.0)).norm() < 1e-15);
    }

    #[test]
    fn g2_pi_antidiagonal_sign_pattern() {
        let g = Su2Element::new(c(0.0, 0.0), c(1.0, 0.0)).unwrap();
        for two_ell in 0..=5 {
            let d = wigner_matrix(two_ell, &g).unwrap();
            for two_m in labels(two_ell) {
                for two_s in labels(two_ell) {
                    let expected = if two_s == -two_m {
                        // (-1)^{l+m} via the doubled sum (l+m integer).
                        if ((two_ell + two_m) / 2) % 2 == 0 {
                            1.0
                        } else {
                            -1.0
                        }
                    } else {
                        0.0
                    };
                    let got = d.get(two_m, two_s);
                    assert!(
                        (got - c(expected, 0.0)).norm() < 1e-14,
                        "2l={two_ell} 2m={two_m} 2s={two_s}: {got}"
                    );
                }
            }
        }
    }

    #[test]
    fn g3_is_diagonal_with_phases() {
        let psi = 2.31f64;
        let g = Su2Element::g3(psi);
        for two_ell in [0, 1, 2, 3, 4] {
            let d = wigner_matrix(two_ell, &g).unwrap();
            for two_m in labels(two_ell) {
                for two_s in labels(two_ell) {
                    let closed = wigner_entry_at_g3(two_ell, two_m, two_s, psi).unwrap();
                    assert!((d.get(two_m, two_s) - closed).norm() < 1e-14);
                }
            }
        }
        // Spot values: psi = pi at l = m = s = 1/2 gives -i.
        let v = wigner_entry_at_g3(1, 1, 1, std::f64::consts::PI).unwrap();
        assert!((v - c(0.0, -1.0)).norm() < 1e-15);
        assert_eq!(
            wigner_entry_at_g3(1, 1, -1, 0.3).unwrap(),
            c(0.0, 0.0)
        );
        let v = wigner_entry_at_g3(2, 0, 0, 0.0).unwrap();
        assert!((v - c(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn unitarity_and_determinant_across_degrees() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let g: Su2Element<f64> = haar_sample(&mut rng);
        for two_ell in [0, 1, 2, 3, 7, 16, 33, 64] {
            let d = wigner_matrix(two_ell, &g).unwrap();
            let u = d.unitarity_defect();
            assert!(u < 1e-10, "2l={two_ell}: unitarity defect {u:e}");
            let det = d.det();
            assert!(
                (det.norm() - 1.0).abs() < 1e-10,
                "2l={two_ell}: |det| = {}",
                det.norm()
            );
        }
    }

    #[test]
    fn homomorphism_on_random_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for two_ell in [1, 2, 3, 5, 8, 12] {
            let g1: Su2Element<f64> = haar_sample(&mut rng);
            let g2: Su2Element<f64> = haar_sample(&mut rng);
            let lhs = wigner_matrix(two_ell, &g1.mul(&g2)).unwrap();
            let rhs = wigner_matrix(two_ell, &g1)
                .unwrap()
                .entries
                .mul(&wigner_matrix(two_ell, &g2).unwrap().entries);
            assert!(lhs.entries.sub(&rhs).max_abs() < 1e-10);
        }
    }

    #[test]
    fn conjugation_symmetries() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for two_ell in [0, 1, 2, 3, 4, 9, 20] {
            let g: Su2Element<f64> = haar_sample(&mut rng);
            let defect = symmetry_check(two_ell, &g).unwrap();
            assert!(defect < 1e-12, "2l={two_ell}: defect {defect:e}");
        }
        // A real pair gives a real matrix.
        let g = Su2Element::new(c(0.6, 0.0), c(0.8, 0.0)).unwrap();
        let d = wigner_matrix(5, &g).unwrap();
        assert!(max_imag_part(&d) < 1e-14);
        assert_eq!(symmetry_check(0, &Su2Element::<f64>::identity()).unwrap(), 0.0);
    }

    #[test]
    fn pure_spin_translation_laws() {
        let mut rng = ChaCha8Rng::seed_from_u64(34);
        for two_ell in [1, 2, 3, 6] {
            let g: Su2Element<f64> = haar_sample(&mut rng);
            let psi: f64 = rng.gen_range(0.0..12.0);
            let d = wigner_matrix(two_ell, &g).unwrap();
            let right = wigner_matrix(two_ell, &g.mul(&Su2Element::g3(psi))).unwrap();
            let left = wigner_matrix(two_ell, &Su2Element::g3(psi).mul(&g)).unwrap();
            for two_m in labels(two_ell) {
                for two_s in labels(two_ell) {
                    let es = C::from_polar(1.0, -0.5 * two_s as f64 * psi);
                    let em = C::from_polar(1.0, -0.5 * two_m as f64 * psi);
                    assert!((right.get(two_m, two_s) - d.get(two_m, two_s) * es).norm() < 1e-11);
                    assert!((left.get(two_m, two_s) - em * d.get(two_m, two_s)).norm() < 1e-11);
                }
            }
        }
    }

    #[test]
    fn little_d_realness_and_pinned_block() {
        let d0 = little_d::<f64>(3, 0.0).unwrap();
        assert!(d0.unitarity_defect() < 1e-14);
        for two_m in labels(3) {
            for two_s in labels(3) {
                let expected = if two_m == two_s { 1.0 } else { 0.0 };
                assert!((d0.get(two_m, two_s) - c(expected, 0.0)).norm() < 1e-14);
            }
        }
        let theta = 0.77f64;
        let d = little_d::<f64>(1, theta).unwrap();
        assert!(max_imag_part(&d) < 1e-12);
        let (ct, st) = ((theta / 2.0).cos(), (theta / 2.0).sin());
        assert!((d.get(1, 1).re - ct).abs() < 1e-14);
        assert!((d.get(1, -1).re + st).abs() < 1e-14);
        assert!((d.get(-1, 1).re - st).abs() < 1e-14);
        assert!((d.get(-1, -1).re - ct).abs() < 1e-14);
        for two_ell in [2, 5, 11] {
            let d = little_d::<f64>(two_ell, 2.113).unwrap();
            assert!(max_imag_part(&d) < 1e-12);
        }
    }

    #[test]
    fn epsilon_matrix_values_and_square() {
        let e0 = epsilon_matrix::<f64>(0).unwrap();
        assert_eq!(e0.entries[(0, 0)], c(1.0, 0.0));

        // Degree 1/2: (m, m') = (1/2, -1/2) -> +1, (-1/2, 1/2) -> -1.
        assert_eq!(epsilon_sign(1, 1, -1), 1);
        assert_eq!(epsilon_sign(1, -1, 1), -1);
        assert_eq!(epsilon_sign(1, 1, 1), 0);

        // Degree 1 antidiagonal reads (1, -1, 1) along m = 1, 0, -1.
        assert_eq!(epsilon_sign(2, 2, -2), 1);
        assert_eq!(epsilon_sign(2, 0, 0), -1);
        assert_eq!(epsilon_sign(2, -2, 2), 1);

        for two_ell in 0..=9 {
            let e = epsilon_matrix::<f64>(two_ell).unwrap();
            let sq = e.entries.mul(&e.entries);
            let sign = if two_ell % 2 == 0 { 1.0 } else { -1.0 };
            let expected = CMatrix::<f64>::identity(dim(two_ell));
            let mut scaled = expected.clone();
            for v in scaled.as_mut_slice() {
                *v *= sign;
            }
            assert!(sq.sub(&scaled).max_abs() < 1e-15);
            // Exactly one +-1 per row and column.
            for i in 0..dim(two_ell) {
                let row_nonzero: usize = (0..dim(two_ell))
                    .filter(|&j| e.entries[(i, j)].norm() > 0.5)
                    .count();
                assert_eq!(row_nonzero, 1);
            }
        }
    }

    #[test]
    fn homogeneous_extension_scales_by_t_pow_2l() {
        let mut rng = ChaCha8Rng::seed_from_u64(55);
        for two_ell in [1, 2, 3, 5] {
            let g: Su2Element<f64> = haar_sample(&mut rng);
            let t: f64 = rng.gen_range(0.5..2.0);
            for two_m in labels(two_ell) {
                for two_s in labels(two_ell) {
                    let base = wigner_entry(two_ell, two_m, two_s, &g).unwrap();
                    let scaled =
                        wigner_entry_general(two_ell, two_m, two_s, g.alpha * t, g.beta * t)
                            .unwrap();
                    let expect = base * t.powi(two_ell);
                    assert!(
                        (scaled - expect).norm() <= 1e-11 * (1.0 + expect.norm()),
                        "2l={two_ell}"
                    );
                }
            }
        }
    }

    #[test]
    fn extension_is_harmonic_in_r4() {
        let mut rng = ChaCha8Rng::seed_from_u64(89);
        for two_ell in [1, 2, 3] {
            for _ in 0..5 {
                let x = [
                    rng.gen_range(-1.2..1.2),
                    rng.gen_range(-1.2..1.2),
                    rng.gen_range(-1.2..1.2),
                    rng.gen_range(-1.2..1.2),
                ];
                let two_m = *labels(two_ell).collect::<Vec<_>>().first().unwrap();
                let rel =
                    ambient_laplacian_fd_defect(two_ell, two_m, two_ell, x, 1e-3).unwrap();
                assert!(rel < 1e-5, "2l={two_ell}: defect {rel:e}");
            }
        }
    }

    #[test]
    fn normalization_scales() {
        let g = Su2Element::<f64>::identity();
        let phi0 = normalized_harmonic(0, 0, 0, &g).unwrap();
        let expected = 1.0 / (4.0 * std::f64::consts::PI);
        assert!((phi0 - c(expected, 0.0)).norm() < 1e-15);
        let y = spin_weighted_harmonic(2, 0, 0, &g).unwrap();
        let d = wigner_entry(2, 0, 0, &g).unwrap();
        let scale = (3.0 / (4.0 * std::f64::consts::PI)).sqrt();
        assert!((y - d * scale).norm() < 1e-15);
    }

    #[test]
    fn band_limit_and_index_errors() {
        let g = Su2Element::<f64>::identity();
        assert!(matches!(
            wigner_matrix(65, &g),
            Err(Error::BandLimitExceeded { two_ell: 65, cap: 64 })
        ));
        assert!(wigner_entry(2, 1, 0, &g).is_err()); // parity mismatch
        assert!(wigner_entry(2, 4, 0, &g).is_err()); // |m| > l
        assert!(monomial_eval(1, 2, c(1.0, 0.0), c(0.0, 0.0)).is_err());
    }
}
