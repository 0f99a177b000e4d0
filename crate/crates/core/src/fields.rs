//! Random fields at coefficient level: invariant Gaussian families,
//! Haar-rotation invariantization, and the spin-measure realization.
//!
//! All generators are pure functions of an explicit random stream and return
//! [`SpectralCoefficients`]; every random draw order is fixed (degrees
//! ascending, rows `m` ascending, entries `s` ascending), so a seeded stream
//! reproduces a field bit-for-bit.
//!
//! Invariance dictionary (verified by the Monte Carlo estimators):
//! - left invariance (law unchanged under `X -> X(g^{-1} .)`) makes the rows
//!   `a^l_{m,.}` exchangeable with cross-covariance
//!   `E{a_{m,s} conj(a_{m',s'})} = delta_{m,m'} K(s, s')`;
//! - right invariance mirrors the structure across columns;
//! - bi-invariance forces the fully diagonal structure with a flat variance
//!   `sigma(l)^2` per degree.

use crate::error::{Error, Result};
use crate::group::{haar_sample, Su2Element};
use crate::half::{check_degree, dim, labels, offset};
use crate::linalg::{eigh, psd_sqrt, CMatrix};
use crate::scalar::Real;
use crate::transform::SpectralCoefficients;
use crate::wigner::wigner_matrix;
use num_complex::Complex;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

/// A probability vector over `s = -l..l` at one degree.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinMeasure<T> {
    pub two_ell: i32,
    /// Masses for `s` ascending; must be nonnegative and sum to 1.
    pub masses: Vec<T>,
}

impl<T: Real> SpinMeasure<T> {
    pub fn validate(&self) -> Result<()> {
        check_degree(self.two_ell)?;
        if self.masses.len() != dim(self.two_ell) {
            return Err(Error::InvalidSpec(format!(
                "spin measure needs {} masses, got {}",
                dim(self.two_ell),
                self.masses.len()
            )));
        }
        let mut total = T::zero();
        for &m in &self.masses {
            if m.is_nan() || m < T::zero() {
                return Err(Error::InvalidSpec("negative or NaN mass".into()));
            }
            total += m;
        }
        if (total - T::one()).abs() > T::from_f64(1e-12).unwrap() {
            return Err(Error::InvalidSpec(format!(
                "masses sum to {:?}, not 1",
                total.to_f64()
            )));
        }
        Ok(())
    }
}

/// Covariance model of an invariant Gaussian family.
#[derive(Debug, Clone, PartialEq)]
pub enum CovarianceSpec<T> {
    /// Fully diagonal: every `a^l_{m,s}` independent with variance
    /// `sigma(l)^2` (bi-invariant law).
    BiInvariant {
        two_big_l: i32,
        /// `sigma(l)^2 >= 0`, one per degree `2l = 0..=2L`.
        sigma_sq: Vec<T>,
    },
    /// Rows `m` i.i.d., columns coupled by a per-degree Hermitian PSD
    /// matrix `K(s, s')` (left-invariant law).
    LeftInvariant {
        two_big_l: i32,
        /// One `(2l+1) x (2l+1)` matrix per degree, indexed by `s` ascending.
        k_matrices: Vec<CMatrix<T>>,
    },
}

impl<T: Real> CovarianceSpec<T> {
    pub fn band_limit(&self) -> i32 {
        match self {
            CovarianceSpec::BiInvariant { two_big_l, .. } => *two_big_l,
            CovarianceSpec::LeftInvariant { two_big_l, .. } => *two_big_l,
        }
    }

    /// Validate shapes, Hermiticity (defect at most 1e-12 relative to the
    /// matrix scale), and positive semidefiniteness (smallest eigenvalue at
    /// least `-1e-10 * trace`).
    pub fn validate(&self) -> Result<()> {
        match self {
            CovarianceSpec::BiInvariant {
                two_big_l,
                sigma_sq,
            } => {
                check_degree(*two_big_l)?;
                if sigma_sq.len() != (*two_big_l + 1) as usize {
                    return Err(Error::InvalidSpec(format!(
                        "need {} spectrum entries, got {}",
                        two_big_l + 1,
                        sigma_sq.len()
                    )));
                }
                for &v in sigma_sq {
                    if v < T::zero() || !v.is_finite() {
                        return Err(Error::InvalidSpec(
                            "power spectrum entries must be finite and >= 0".into(),
                        ));
                    }
                }
                Ok(())
            }
            CovarianceSpec::LeftInvariant {
                two_big_l,
                k_matrices,
            } => {
                check_degree(*two_big_l)?;
                if k_matrices.len() != (*two_big_l + 1) as usize {
                    return Err(Error::InvalidSpec(format!(
                        "need {} K matrices, got {}",
                        two_big_l + 1,
                        k_matrices.len()
                    )));
                }
                for (d, k) in k_matrices.iter().enumerate() {
                    let n = dim(d as i32);
                    if k.rows() != n || k.cols() != n {
                        return Err(Error::InvalidSpec(format!(
                            "K at degree 2l={d} must be {n}x{n}"
                        )));
                    }
                    let scale = T::one().max(k.max_abs());
                    if k.hermiticity_defect() > T::from_f64(1e-12).unwrap() * scale {
                        return Err(Error::InvalidSpec(format!(
                            "K at degree 2l={d} is not Hermitian"
                        )));
                    }
                    let (vals, _) = eigh(k);
                    let trace = k.trace_re();
                    let min = vals.first().copied().unwrap_or_else(T::zero);
                    if min < -T::from_f64(1e-10).unwrap() * trace.max(T::zero()) {
                        return Err(Error::NotPositiveSemidefinite {
                            min_eigenvalue: min.to_f64().unwrap_or(f64::NAN),
                            trace: trace.to_f64().unwrap_or(f64::NAN),
                        });
                    }
                }
                Ok(())
            }
        }
    }
}

/// Standard circularly-symmetric complex Gaussian with `E|a|^2 = sigma^2`:
/// `a = sigma (xi_1 + i xi_2) / sqrt(2)`.
pub fn complex_gaussian<T, R>(rng: &mut R, sigma: T) -> Complex<T>
where
    T: Real,
    R: Rng + ?Sized,
    StandardNormal: Distribution<T>,
{
    let x: T = StandardNormal.sample(rng);
    let y: T = StandardNormal.sample(rng);
    let r = sigma / (T::one() + T::one()).sqrt();
    Complex::new(x * r, y * r)
}

/// Bi-invariant Gaussian family: all coefficients independent, circularly
/// symmetric, variance `sigma(l)^2`.
pub fn gen_gaussian_bi_invariant<T, R>(
    spec: &CovarianceSpec<T>,
    rng: &mut R,
) -> Result<SpectralCoefficients<T>>
where
    T: Real,
    R: Rng + ?Sized,
    StandardNormal: Distribution<T>,
{
    let CovarianceSpec::BiInvariant {
        two_big_l,
        sigma_sq,
    } = spec
    else {
        return Err(Error::InvalidSpec(
            "expected a bi-invariant covariance spec".into(),
        ));
    };
    spec.validate()?;
    let mut out = SpectralCoefficients::zeros(*two_big_l)?;
    for d in 0..=*two_big_l {
        let sigma = sigma_sq[d as usize].sqrt();
        let block = &mut out.blocks[d as usize];
        let n = dim(d);
        for r in 0..n {
            for c in 0..n {
                block[(r, c)] = complex_gaussian(rng, sigma);
            }
        }
    }
    Ok(out)
}

/// Left-invariant Gaussian family: rows i.i.d., columns coupled by `K` via
/// its PSD square root applied to i.i.d. standard complex Gaussians, giving
/// `E{a_{m,s} conj(a_{m',s'})} = delta_{m,m'} K(s,s')` and vanishing
/// pseudo-correlations.
pub fn gen_gaussian_left_invariant<T, R>(
    spec: &CovarianceSpec<T>,
    rng: &mut R,
) -> Result<SpectralCoefficients<T>>
where
    T: Real,
    R: Rng + ?Sized,
    StandardNormal: Distribution<T>,
{
    let CovarianceSpec::LeftInvariant {
        two_big_l,
        k_matrices,
    } = spec
    else {
        return Err(Error::InvalidSpec(
            "expected a left-invariant covariance spec".into(),
        ));
    };
    spec.validate()?;
    let mut out = SpectralCoefficients::zeros(*two_big_l)?;
    for d in 0..=*two_big_l {
        let factor = psd_sqrt(&k_matrices[d as usize]);
        let n = dim(d);
        let block = &mut out.blocks[d as usize];
        for r in 0..n {
            let z: Vec<Complex<T>> = (0..n).map(|_| complex_gaussian(rng, T::one())).collect();
            let row = factor.mul_vec(&z);
            for (c, v) in row.into_iter().enumerate() {
                block[(r, c)] = v;
            }
        }
    }
    Ok(out)
}

/// Which translation a coefficient rotation realizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RotationSide {
    /// `X -> X(g^{-1} .)`
    Left,
    /// `X -> X(. g)`
    Right,
}

/// Which invariantization [`gen_rotated`] performs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InvarianceFamily {
    Left,
    Right,
    Bi,
}

/// Pull-back rotation of coefficients.
///
/// Left (`X -> X(g^{-1} .)`): every column transforms by `conj(D^l(g))`,
/// i.e. `A' = conj(D^l(g)) A`. Right (`X -> X(. g)`): every row transforms
/// by `D^l(g)`, i.e. `A' = A D^l(g)^T`. Both preserve the coefficient norm
/// (the matrices are unitary), and synthesize to the translated field.
pub fn rotate_coefficients<T: Real>(
    coeffs: &SpectralCoefficients<T>,
    g: &Su2Element<T>,
    side: RotationSide,
) -> Result<SpectralCoefficients<T>> {
    let mut out = coeffs.clone();
    for d in 0..=coeffs.two_big_l {
        let dm = wigner_matrix(d, g)?;
        out.blocks[d as usize] = match side {
            RotationSide::Left => dm.entries.conj().mul(&coeffs.blocks[d as usize]),
            RotationSide::Right => coeffs.blocks[d as usize].mul(&dm.entries.transpose()),
        };
    }
    Ok(out)
}

/// Invariantize a template by Haar rotation: draw independent Haar elements
/// for the requested sides and rotate the coefficients. The output law is
/// strongly invariant on those sides regardless of the template.
pub fn gen_rotated<T, R>(
    template: &SpectralCoefficients<T>,
    family: InvarianceFamily,
    rng: &mut R,
) -> Result<SpectralCoefficients<T>>
where
    T: Real,
    R: Rng + ?Sized,
    StandardNormal: Distribution<T>,
{
    match family {
        InvarianceFamily::Left => {
            let g: Su2Element<T> = haar_sample(rng);
            rotate_coefficients(template, &g, RotationSide::Left)
        }
        InvarianceFamily::Right => {
            let g: Su2Element<T> = haar_sample(rng);
            rotate_coefficients(template, &g, RotationSide::Right)
        }
        InvarianceFamily::Bi => {
            let g1: Su2Element<T> = haar_sample(rng);
            let g2: Su2Element<T> = haar_sample(rng);
            let once = rotate_coefficients(template, &g1, RotationSide::Left)?;
            rotate_coefficients(&once, &g2, RotationSide::Right)
        }
    }
}

/// Realize a prescribed right-spin measure: with an independent Haar element
/// `gamma_s` per column, set `a^l_{m,s} = mu({s})^{1/2} D^l_{s,m}(gamma_s)`.
/// Row norms of a unitary matrix are 1, so *every sample* has `||X||^2 = 1`
/// and right-spin measure exactly `mu`.
pub fn realize_spin_measure<T, R>(
    mu: &SpinMeasure<T>,
    rng: &mut R,
) -> Result<SpectralCoefficients<T>>
where
    T: Real,
    R: Rng + ?Sized,
    StandardNormal: Distribution<T>,
{
    mu.validate()?;
    let two_ell = mu.two_ell;
    let mut out = SpectralCoefficients::zeros(two_ell)?;
    for (idx, two_s) in labels(two_ell).enumerate() {
        let gamma: Su2Element<T> = haar_sample(rng);
        let d = wigner_matrix(two_ell, &gamma)?;
        let root = mu.masses[idx].sqrt();
        for two_m in labels(two_ell) {
            out.set(two_ell, two_m, two_s, d.get(two_s, two_m) * root);
        }
    }
    Ok(out)
}

/// Apply one shared Haar rotation to a collection of per-degree vectors:
/// `v_i -> D^{l_i}(gamma) v_i`. The single shared element is what makes the
/// output collection strongly D-invariant.
pub fn d_invariantize<T, R>(
    vectors: &[(i32, Vec<Complex<T>>)],
    rng: &mut R,
) -> Result<Vec<(i32, Vec<Complex<T>>)>>
where
    T: Real,
    R: Rng + ?Sized,
    StandardNormal: Distribution<T>,
{
    for (two_ell, v) in vectors {
        check_degree(*two_ell)?;
        if v.len() != dim(*two_ell) {
            return Err(Error::InvalidSpec(format!(
                "vector at degree 2l={two_ell} must have length {}",
                dim(*two_ell)
            )));
        }
    }
    let gamma: Su2Element<T> = haar_sample(rng);
    let mut out = Vec::with_capacity(vectors.len());
    for (two_ell, v) in vectors {
        let d = wigner_matrix(*two_ell, &gamma)?;
        out.push((*two_ell, d.entries.mul_vec(v)));
    }
    Ok(out)
}

/// Standard basis vector `e_s` of the degree-`l` representation space.
pub fn basis_vector<T: Real>(two_ell: i32, two_s: i32) -> Vec<Complex<T>> {
    let mut v = vec![Complex::new(T::zero(), T::zero()); dim(two_ell)];
    v[offset(two_ell, two_s)] = Complex::new(T::one(), T::zero());
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transform::{spin_measures, synthesize};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    type C = Complex<f64>;

    fn random_coeffs(two_big_l: i32, rng: &mut ChaCha8Rng) -> SpectralCoefficients<f64> {
        let mut c = SpectralCoefficients::zeros(two_big_l).unwrap();
        for (l, m, s) in c.indices().collect::<Vec<_>>() {
            c.set(
                l,
                m,
                s,
                C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
            );
        }
        c
    }

    #[test]
    fn zero_spectrum_gives_zero_field() {
        let spec = CovarianceSpec::BiInvariant {
            two_big_l: 2,
            sigma_sq: vec![0.0; 3],
        };
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let f = gen_gaussian_bi_invariant(&spec, &mut rng).unwrap();
        assert_eq!(f.norm_sq(), 0.0);
    }

    #[test]
    fn covariance_spec_validation() {
        let bad_len = CovarianceSpec::BiInvariant {
            two_big_l: 2,
            sigma_sq: vec![1.0; 2],
        };
        assert!(matches!(bad_len.validate(), Err(Error::InvalidSpec(_))));
        let negative = CovarianceSpec::BiInvariant {
            two_big_l: 0,
            sigma_sq: vec![-1.0],
        };
        assert!(negative.validate().is_err());

        // Non-Hermitian K.
        let mut k = CMatrix::<f64>::identity(2);
        k[(0, 1)] = C::new(0.5, 0.0);
        let spec = CovarianceSpec::LeftInvariant {
            two_big_l: 1,
            k_matrices: vec![CMatrix::identity(1), k],
        };
        assert!(matches!(spec.validate(), Err(Error::InvalidSpec(_))));

        // Hermitian but indefinite K.
        let mut k = CMatrix::<f64>::zeros(2, 2);
        k[(0, 1)] = C::new(1.0, 0.0);
        k[(1, 0)] = C::new(1.0, 0.0);
        let spec = CovarianceSpec::LeftInvariant {
            two_big_l: 1,
            k_matrices: vec![CMatrix::identity(1), k],
        };
        assert!(matches!(
            spec.validate(),
            Err(Error::NotPositiveSemidefinite { .. })
        ));
    }

    #[test]
    fn generators_are_deterministic_per_seed() {
        let spec = CovarianceSpec::BiInvariant {
            two_big_l: 3,
            sigma_sq: vec![1.0, 0.5, 0.25, 0.125],
        };
        let a = gen_gaussian_bi_invariant(&spec, &mut ChaCha8Rng::seed_from_u64(7)).unwrap();
        let b = gen_gaussian_bi_invariant(&spec, &mut ChaCha8Rng::seed_from_u64(7)).unwrap();
        assert_eq!(a, b);
        let c = gen_gaussian_bi_invariant(&spec, &mut ChaCha8Rng::seed_from_u64(8)).unwrap();
        assert!(a.max_abs_diff(&c) > 0.0);
    }

    #[test]
    fn left_invariant_diagonal_k_gives_column_variances() {
        // K diagonal: columns independent with variances K(s, s); spot-check
        // second moments at modest N.
        let mut k = CMatrix::<f64>::zeros(3, 3);
        k[(0, 0)] = C::new(2.0, 0.0);
        k[(1, 1)] = C::new(0.5, 0.0);
        k[(2, 2)] = C::new(1.0, 0.0);
        let spec = CovarianceSpec::LeftInvariant {
            two_big_l: 2,
            k_matrices: vec![CMatrix::identity(1), CMatrix::identity(2), k],
        };
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        let n = 4000;
        let mut acc = [0.0f64; 3];
        let mut cross = C::new(0.0, 0.0);
        for _ in 0..n {
            let f = gen_gaussian_left_invariant(&spec, &mut rng).unwrap();
            for (i, two_s) in labels(2).enumerate() {
                acc[i] += f.get(2, 0, two_s).norm_sqr();
            }
            cross += f.get(2, 0, -2) * f.get(2, 2, -2).conj();
        }
        let expect = [2.0, 0.5, 1.0];
        for i in 0..3 {
            let mean = acc[i] / n as f64;
            // stderr of |a|^2 for complex Gaussian is sigma^2 / sqrt(N).
            let tol = 5.0 * expect[i] / (n as f64).sqrt();
            assert!((mean - expect[i]).abs() < tol, "col {i}: {mean}");
        }
        // Cross-m correlation vanishes.
        let tol = 5.0 * 2.0 / (n as f64).sqrt();
        assert!((cross / n as f64).norm() < tol);
    }

    #[test]
    fn rotation_identity_and_norm() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let coeffs = random_coeffs(4, &mut rng);
        let id = Su2Element::identity();
        let same = rotate_coefficients(&coeffs, &id, RotationSide::Left).unwrap();
        assert!(same.max_abs_diff(&coeffs) < 1e-14);
        let g: Su2Element<f64> = haar_sample(&mut rng);
        for side in [RotationSide::Left, RotationSide::Right] {
            let rotated = rotate_coefficients(&coeffs, &g, side).unwrap();
            assert!((rotated.norm_sq() - coeffs.norm_sq()).abs() < 1e-11 * coeffs.norm_sq());
        }
    }

    #[test]
    fn rotation_pointwise_contract() {
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        let coeffs = random_coeffs(4, &mut rng);
        let g: Su2Element<f64> = haar_sample(&mut rng);
        let left = rotate_coefficients(&coeffs, &g, RotationSide::Left).unwrap();
        let right = rotate_coefficients(&coeffs, &g, RotationSide::Right).unwrap();
        let f = synthesize(&coeffs);
        let fl = synthesize(&left);
        let fr = synthesize(&right);
        for _ in 0..20 {
            let z: Su2Element<f64> = haar_sample(&mut rng);
            let want_left = f(&g.inv().mul(&z));
            assert!((fl(&z) - want_left).norm() < 1e-9);
            let want_right = f(&z.mul(&g));
            assert!((fr(&z) - want_right).norm() < 1e-9);
        }
    }

    #[test]
    fn left_rotation_preserves_right_spin_measure() {
        // Template phi^1_{0,1}: left rotations mix rows only, so the
        // right-spin measure stays the delta at s = 1 sample by sample.
        let template = SpectralCoefficients::<f64>::delta(2, 2, 0, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for _ in 0..10 {
            let sample = gen_rotated(&template, InvarianceFamily::Left, &mut rng).unwrap();
            let rs = spin_measures(&sample).unwrap().right;
            assert!((rs[&2] - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn realize_spin_measure_contracts() {
        let mu = SpinMeasure::<f64> {
            two_ell: 2,
            masses: vec![0.2, 0.3, 0.5],
        };
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        for _ in 0..10 {
            let sample = realize_spin_measure(&mu, &mut rng).unwrap();
            assert!((sample.norm_sq() - 1.0).abs() < 1e-10);
            let rs = spin_measures(&sample).unwrap().right;
            for (idx, two_s) in labels(2).enumerate() {
                assert!((rs[&two_s] - mu.masses[idx]).abs() < 1e-10);
            }
        }
        // Delta measure concentrates one column.
        let delta_mu = SpinMeasure {
            two_ell: 2,
            masses: vec![0.0, 0.0, 1.0],
        };
        let sample = realize_spin_measure(&delta_mu, &mut rng).unwrap();
        for (l, m, s) in sample.indices() {
            if s != 2 {
                assert_eq!(sample.get(l, m, s), C::new(0.0, 0.0));
            }
        }
        // Invalid measures are rejected.
        let bad = SpinMeasure {
            two_ell: 2,
            masses: vec![0.5, 0.6, 0.2],
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn d_invariantize_shares_one_rotation() {
        let v = basis_vector::<f64>(2, 0);
        let pairs = vec![(2, v.clone()), (2, v)];
        let mut rng = ChaCha8Rng::seed_from_u64(47);
        let out = d_invariantize(&pairs, &mut rng).unwrap();
        for (a, b) in out[0].1.iter().zip(&out[1].1) {
            assert_eq!(a, b);
        }
        // Zero vectors stay zero.
        let zeros = vec![(1, vec![C::new(0.0, 0.0); 2])];
        let out = d_invariantize(&zeros, &mut rng).unwrap();
        for v in &out[0].1 {
            assert_eq!(*v, C::new(0.0, 0.0));
        }
        // Length mismatch rejected.
        assert!(d_invariantize(&[(2, vec![C::new(1.0, 0.0); 2])], &mut rng).is_err());
    }
}
