//! Band-limited spectral transforms and spectral operators.
//!
//! A field `X` with band limit `2L` is the finite sum
//! `X(g) = sum_{2l <= 2L} sum_{m,s} a^l_{m,s} phi^l_{m,s}(g)` over the
//! orthonormal hyperspherical harmonics; [`SpectralCoefficients`] stores the
//! dense per-degree blocks `a^l`. [`analyze`] recovers coefficients by
//! quadrature inner products, [`synthesize`] evaluates the sum pointwise, and
//! the Laplacian family acts diagonally with the exact multipliers
//!
//! - full:       `-l(l+1)`            (i.e. `-(1/2) l (2l+2)`)
//! - vertical:   `-s^2`
//! - horizontal: `-(l-s)(l+s+1) - s`
//! - spin:       `-(l-s)(l+s+1)`
//!
//! each computed exactly from doubled indices (numerators are integers,
//! denominators powers of two). The full multiplier is the sum of the
//! vertical and horizontal ones — see [`multiplier_identity_exact`].

use crate::error::{Error, Result};
use crate::grid::QuadratureGrid;
use crate::group::Su2Element;
use crate::half::{check_degree, check_indices, dim, labels, offset};
use crate::linalg::CMatrix;
use crate::scalar::Real;
use crate::wigner::{harmonic_scale, wigner_matrix};
use num_complex::Complex;
use std::collections::BTreeMap;

/// Dense band-limited coefficient family `{a^l_{m,s} : 2l <= 2L}`.
///
/// Block `d` holds the `(d+1) x (d+1)` matrix of degree `two_ell = d`, rows
/// indexed by `m` ascending and columns by `s` ascending — the same layout
/// as the Wigner matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralCoefficients<T> {
    pub two_big_l: i32,
    pub blocks: Vec<CMatrix<T>>,
}

impl<T: Real> SpectralCoefficients<T> {
    /// All-zero coefficients up to the band limit.
    pub fn zeros(two_big_l: i32) -> Result<Self> {
        check_degree(two_big_l)?;
        let blocks = (0..=two_big_l)
            .map(|d| CMatrix::zeros(dim(d), dim(d)))
            .collect();
        Ok(SpectralCoefficients { two_big_l, blocks })
    }

    /// A single unit coefficient at `(l, m, s)`.
    pub fn delta(two_big_l: i32, two_ell: i32, two_m: i32, two_s: i32) -> Result<Self> {
        check_indices(two_ell, two_m, two_s)?;
        if two_ell > two_big_l {
            return Err(Error::BandLimitExceeded {
                two_ell,
                cap: two_big_l,
            });
        }
        let mut c = Self::zeros(two_big_l)?;
        c.set(two_ell, two_m, two_s, Complex::new(T::one(), T::zero()));
        Ok(c)
    }

    pub fn get(&self, two_ell: i32, two_m: i32, two_s: i32) -> Complex<T> {
        self.blocks[two_ell as usize][(offset(two_ell, two_m), offset(two_ell, two_s))]
    }

    pub fn set(&mut self, two_ell: i32, two_m: i32, two_s: i32, v: Complex<T>) {
        self.blocks[two_ell as usize][(offset(two_ell, two_m), offset(two_ell, two_s))] = v;
    }

    /// Squared coefficient norm `sum |a|^2` — equals `||X||^2_{L^2}` by
    /// orthonormality (Parseval).
    pub fn norm_sq(&self) -> T {
        let mut acc = T::zero();
        for block in &self.blocks {
            for v in block.as_slice() {
                acc += v.norm_sqr();
            }
        }
        acc
    }

    /// Largest entrywise difference against another set (band limits must
    /// match).
    pub fn max_abs_diff(&self, other: &Self) -> T {
        assert_eq!(self.two_big_l, other.two_big_l);
        let mut worst = T::zero();
        for (a, b) in self.blocks.iter().zip(&other.blocks) {
            worst = worst.max(a.sub(b).max_abs());
        }
        worst
    }

    /// Iterate all valid `(two_ell, two_m, two_s)` indices in block order.
    pub fn indices(&self) -> impl Iterator<Item = (i32, i32, i32)> + '_ {
        (0..=self.two_big_l).flat_map(|d| {
            labels(d).flat_map(move |two_m| labels(d).map(move |two_s| (d, two_m, two_s)))
        })
    }
}

/// Forward transform: `a^l_{m,s} = <phi^l_{m,s}, field>` by quadrature.
/// The caller is responsible for the field being band-limited at the grid's
/// band limit; higher-degree content aliases.
pub fn analyze<T: Real>(
    grid: &QuadratureGrid<T>,
    mut field: impl FnMut(&Su2Element<T>) -> Complex<T>,
) -> Result<SpectralCoefficients<T>> {
    let two_big_l = grid.two_big_l;
    let mut out = SpectralCoefficients::zeros(two_big_l)?;
    for node in &grid.nodes {
        let f = field(&node.element) * node.weight;
        for two_ell in 0..=two_big_l {
            let d = wigner_matrix(two_ell, &node.element)?;
            let scale = harmonic_scale::<T>(two_ell);
            let block = &mut out.blocks[two_ell as usize];
            let n = dim(two_ell);
            for r in 0..n {
                for c in 0..n {
                    let phi = d.entries[(r, c)] * scale;
                    block[(r, c)] += phi.conj() * f;
                }
            }
        }
    }
    Ok(out)
}

/// Pointwise evaluation of the coefficient sum — the inverse transform.
pub fn synthesize<'a, T: Real>(
    coeffs: &'a SpectralCoefficients<T>,
) -> impl Fn(&Su2Element<T>) -> Complex<T> + 'a {
    move |g: &Su2Element<T>| {
        let mut acc = Complex::new(T::zero(), T::zero());
        for two_ell in 0..=coeffs.two_big_l {
            let block = &coeffs.blocks[two_ell as usize];
            let d = wigner_matrix(two_ell, g).expect("degree within cap by construction");
            let scale = harmonic_scale::<T>(two_ell);
            let n = dim(two_ell);
            let mut block_acc = Complex::new(T::zero(), T::zero());
            for r in 0..n {
                for c in 0..n {
                    block_acc += block[(r, c)] * d.entries[(r, c)];
                }
            }
            acc += block_acc * scale;
        }
        acc
    }
}

/// Which Laplacian to apply spectrally.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LaplacianKind {
    /// Laplace-Beltrami of the radius-2 round metric: `-l(l+1)`.
    Full,
    /// Along the diagonal-circle fibers: `-s^2`.
    Vertical,
    /// Transverse to the fibers: `-(l-s)(l+s+1) - s`.
    Horizontal,
    /// The spin Laplacian: `-(l-s)(l+s+1)`.
    Spin,
}

/// Exact eigenvalue of the chosen operator on `D^l_{.,s}`.
///
/// Numerators are formed in integer arithmetic on doubled indices and the
/// final division by 4 is exact in binary floating point.
pub fn laplacian_multiplier<T: Real>(
    kind: LaplacianKind,
    two_ell: i32,
    two_s: i32,
) -> Result<T> {
    check_indices(two_ell, two_s, two_s)?;
    let quarter = T::from_f64(0.25).unwrap();
    let num = match kind {
        LaplacianKind::Full => two_ell * (two_ell + 2),
        LaplacianKind::Vertical => two_s * two_s,
        LaplacianKind::Horizontal => {
            (two_ell - two_s) * (two_ell + two_s + 2) + 2 * two_s
        }
        LaplacianKind::Spin => (two_ell - two_s) * (two_ell + two_s + 2),
    };
    Ok(-T::from_i32_exact(num) * quarter)
}

/// The splitting identity `full = horizontal + vertical`, i.e.
/// `2l(2l+2) = (2l-2s)(2l+2s+2) + 2(2s) + (2s)^2` — checked exactly in
/// integer arithmetic on doubled indices.
pub fn multiplier_identity_exact(two_ell: i32, two_s: i32) -> bool {
    let lhs = (two_ell as i64) * (two_ell as i64 + 2);
    let rhs = (two_ell as i64 - two_s as i64) * (two_ell as i64 + two_s as i64 + 2)
        + 2 * two_s as i64
        + (two_s as i64) * (two_s as i64);
    lhs == rhs
}

/// Entrywise spectral application of the chosen Laplacian.
pub fn apply_laplacian<T: Real>(
    coeffs: &SpectralCoefficients<T>,
    kind: LaplacianKind,
) -> Result<SpectralCoefficients<T>> {
    let mut out = coeffs.clone();
    for two_ell in 0..=coeffs.two_big_l {
        for two_s in labels(two_ell) {
            let mult = laplacian_multiplier::<T>(kind, two_ell, two_s)?;
            for two_m in labels(two_ell) {
                let v = out.get(two_ell, two_m, two_s);
                out.set(two_ell, two_m, two_s, v * mult);
            }
        }
    }
    Ok(out)
}

/// Which index a spin projection pins.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpinSide {
    Left,
    Right,
}

/// Keep only the row `m = k` (left) or column `s = k` (right) of every
/// degree block; all other entries become zero. A right projection at `k`
/// synthesizes to a function with `F(g g3(psi)) = e^{-i k psi} F(g)` — the
/// pull-back of a spin-`(-k)` section.
pub fn project_spin<T: Real>(
    coeffs: &SpectralCoefficients<T>,
    side: SpinSide,
    two_k: i32,
) -> SpectralCoefficients<T> {
    let mut out = SpectralCoefficients {
        two_big_l: coeffs.two_big_l,
        blocks: coeffs
            .blocks
            .iter()
            .map(|b| CMatrix::zeros(b.rows(), b.cols()))
            .collect(),
    };
    for two_ell in 0..=coeffs.two_big_l {
        if two_k.abs() > two_ell || (two_ell - two_k) % 2 != 0 {
            continue;
        }
        match side {
            SpinSide::Left => {
                for two_s in labels(two_ell) {
                    out.set(two_ell, two_k, two_s, coeffs.get(two_ell, two_k, two_s));
                }
            }
            SpinSide::Right => {
                for two_m in labels(two_ell) {
                    out.set(two_ell, two_m, two_k, coeffs.get(two_ell, two_m, two_k));
                }
            }
        }
    }
    out
}

/// The four spectral probability measures of a nonzero field: `total` over
/// `(l, m, s)`, `left` over `m`, `right` over `s`, `bi` over `(m, s)` — all
/// normalized squared-coefficient masses, keyed by doubled indices.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinMeasureSet<T> {
    pub total: BTreeMap<(i32, i32, i32), T>,
    pub left: BTreeMap<i32, T>,
    pub right: BTreeMap<i32, T>,
    pub bi: BTreeMap<(i32, i32), T>,
}

impl<T: Real> SpinMeasureSet<T> {
    /// Largest deviation of each measure's total mass from 1.
    pub fn normalization_defect(&self) -> T {
        let sum = |it: &mut dyn Iterator<Item = T>| -> T {
            let mut acc = T::zero();
            for v in it {
                acc += v;
            }
            acc
        };
        let t = sum(&mut self.total.values().copied());
        let l = sum(&mut self.left.values().copied());
        let r = sum(&mut self.right.values().copied());
        let b = sum(&mut self.bi.values().copied());
        let one = T::one();
        (t - one)
            .abs()
            .max((l - one).abs())
            .max((r - one).abs())
            .max((b - one).abs())
    }
}

/// Spectral probability and its three marginals for a nonzero coefficient
/// set. Masses for every index up to the band limit are present (zeros
/// included).
///
/// # Errors
/// [`Error::ZeroField`] when all coefficients vanish.
pub fn spin_measures<T: Real>(coeffs: &SpectralCoefficients<T>) -> Result<SpinMeasureSet<T>> {
    let norm = coeffs.norm_sq();
    if norm <= T::zero() {
        return Err(Error::ZeroField);
    }
    let mut total = BTreeMap::new();
    let mut left = BTreeMap::new();
    let mut right = BTreeMap::new();
    let mut bi = BTreeMap::new();
    for (two_ell, two_m, two_s) in coeffs.indices() {
        let mass = coeffs.get(two_ell, two_m, two_s).norm_sqr() / norm;
        total.insert((two_ell, two_m, two_s), mass);
        *left.entry(two_m).or_insert_with(T::zero) += mass;
        *right.entry(two_s).or_insert_with(T::zero) += mass;
        *bi.entry((two_m, two_s)).or_insert_with(T::zero) += mass;
    }
    Ok(SpinMeasureSet {
        total,
        left,
        right,
        bi,
    })
}

/// Finite-difference Laplace-Beltrami oracle: the degree-0 homogeneous
/// extension `F(x) = field(x / |x|)` is differentiated by central second
/// differences at the ambient point `2g` (on the radius-2 sphere), where the
/// ambient R^4 Laplacian of a degree-0 extension restricts to the intrinsic
/// Laplacian of the radius-2 metric.
pub fn fd_sphere_laplacian<T: Real>(
    field: impl Fn(&Su2Element<T>) -> Complex<T>,
    g: &Su2Element<T>,
    h: T,
) -> Complex<T> {
    let two = T::one() + T::one();
    let x = [
        two * g.alpha.re,
        two * g.alpha.im,
        two * g.beta.re,
        two * g.beta.im,
    ];
    let eval = |y: [T; 4]| -> Complex<T> {
        // Su2Element::new normalizes, realizing the degree-0 extension.
        let e = Su2Element::new(Complex::new(y[0], y[1]), Complex::new(y[2], y[3]))
            .expect("FD stencil stays far from the origin");
        field(&e)
    };
    let f0 = eval(x);
    let mut acc = Complex::new(T::zero(), T::zero());
    for i in 0..4 {
        let mut xp = x;
        xp[i] += h;
        let mut xm = x;
        xm[i] -= h;
        acc += eval(xp) + eval(xm) - f0 * two;
    }
    acc / (h * h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::build_grid;
    use crate::group::haar_sample;
    use crate::wigner::{normalized_harmonic, wigner_entry};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    type C = Complex<f64>;

    fn random_coeffs(two_big_l: i32, rng: &mut ChaCha8Rng) -> SpectralCoefficients<f64> {
        let mut c = SpectralCoefficients::zeros(two_big_l).unwrap();
        for (l, m, s) in c.indices().collect::<Vec<_>>() {
            c.set(l, m, s, C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        }
        c
    }

    #[test]
    fn analyze_picks_out_basis_functions() {
        let grid = build_grid::<f64>(2).unwrap();
        let coeffs = analyze(&grid, |g| normalized_harmonic(2, 0, 2, g).unwrap()).unwrap();
        for (l, m, s) in coeffs.indices() {
            let got = coeffs.get(l, m, s);
            let expect = if (l, m, s) == (2, 0, 2) { 1.0 } else { 0.0 };
            assert!(
                (got - C::new(expect, 0.0)).norm() < 1e-9,
                "({l},{m},{s}): {got}"
            );
        }
    }

    #[test]
    fn analyze_unnormalized_wigner_entry() {
        // field = D^{1/2}_{1/2,1/2} has the single coefficient
        // 4 pi / sqrt(2) at (1/2, 1/2, 1/2).
        let grid = build_grid::<f64>(1).unwrap();
        let coeffs = analyze(&grid, |g| wigner_entry(1, 1, 1, g).unwrap()).unwrap();
        let expect = 4.0 * std::f64::consts::PI / 2.0f64.sqrt();
        assert!((coeffs.get(1, 1, 1) - C::new(expect, 0.0)).norm() < 1e-9);
        assert!(coeffs.get(1, -1, 1).norm() < 1e-9);
        assert!(coeffs.get(0, 0, 0).norm() < 1e-9);
    }

    #[test]
    fn round_trip_analyze_synthesize() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let coeffs = random_coeffs(6, &mut rng);
        let grid = build_grid::<f64>(6).unwrap();
        let back = analyze(&grid, synthesize(&coeffs)).unwrap();
        assert!(back.max_abs_diff(&coeffs) < 1e-9);
    }

    #[test]
    fn parseval_on_grid() {
        let mut rng = ChaCha8Rng::seed_from_u64(78);
        let coeffs = random_coeffs(4, &mut rng);
        let grid = build_grid::<f64>(4).unwrap();
        let grid_norm = grid.norm_sq(synthesize(&coeffs));
        assert!((grid_norm - coeffs.norm_sq()).abs() < 1e-9 * (1.0 + grid_norm));
    }

    #[test]
    fn synthesize_trivial_cases() {
        let zero = SpectralCoefficients::<f64>::zeros(3).unwrap();
        let g = Su2Element::identity();
        assert_eq!(synthesize(&zero)(&g), C::new(0.0, 0.0));

        let delta = SpectralCoefficients::<f64>::delta(2, 0, 0, 0).unwrap();
        let f = synthesize(&delta);
        let expect = 1.0 / (4.0 * std::f64::consts::PI);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..5 {
            let g: Su2Element<f64> = haar_sample(&mut rng);
            assert!((f(&g) - C::new(expect, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn multiplier_values_and_identity() {
        // full at l = 1/2 -> -3/4.
        let v: f64 = laplacian_multiplier(LaplacianKind::Full, 1, 1).unwrap();
        assert_eq!(v, -0.75);
        // vertical at s = 1 -> -1.
        let v: f64 = laplacian_multiplier(LaplacianKind::Vertical, 2, 2).unwrap();
        assert_eq!(v, -1.0);
        // spin at l = s = 1 -> 0 (top spin annihilated).
        let v: f64 = laplacian_multiplier(LaplacianKind::Spin, 2, 2).unwrap();
        assert_eq!(v, 0.0);
        // full at l = 1 -> -2.
        let v: f64 = laplacian_multiplier(LaplacianKind::Full, 2, 0).unwrap();
        assert_eq!(v, -2.0);
        // Exact splitting for every table entry up to the cap.
        for two_ell in 0..=64 {
            for two_s in labels(two_ell) {
                assert!(multiplier_identity_exact(two_ell, two_s));
                let full: f64 = laplacian_multiplier(LaplacianKind::Full, two_ell, two_s).unwrap();
                let vert: f64 =
                    laplacian_multiplier(LaplacianKind::Vertical, two_ell, two_s).unwrap();
                let horiz: f64 =
                    laplacian_multiplier(LaplacianKind::Horizontal, two_ell, two_s).unwrap();
                let spin: f64 = laplacian_multiplier(LaplacianKind::Spin, two_ell, two_s).unwrap();
                assert_eq!(full, vert + horiz);
                assert_eq!(horiz, spin - two_s as f64 / 2.0);
            }
        }
    }

    #[test]
    fn apply_laplacian_scales_deltas() {
        let delta = SpectralCoefficients::<f64>::delta(2, 1, 1, -1).unwrap();
        let out = apply_laplacian(&delta, LaplacianKind::Full).unwrap();
        assert!((out.get(1, 1, -1) - C::new(-0.75, 0.0)).norm() < 1e-15);
        // Constant (l = 0) is annihilated.
        let constant = SpectralCoefficients::<f64>::delta(2, 0, 0, 0).unwrap();
        let out = apply_laplacian(&constant, LaplacianKind::Full).unwrap();
        assert_eq!(out.get(0, 0, 0), C::new(0.0, 0.0));
    }

    #[test]
    fn spectral_vs_finite_difference_laplacian() {
        // Random degree-1 field: spectral full Laplacian is -2 X.
        let mut rng = ChaCha8Rng::seed_from_u64(91);
        let mut coeffs = SpectralCoefficients::<f64>::zeros(2).unwrap();
        for m in labels(2) {
            for s in labels(2) {
                coeffs.set(2, m, s, C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
            }
        }
        let f = synthesize(&coeffs);
        for _ in 0..5 {
            let g: Su2Element<f64> = haar_sample(&mut rng);
            let fd = fd_sphere_laplacian(&f, &g, 1e-3);
            let expect = f(&g) * (-2.0);
            let rel = (fd - expect).norm() / expect.norm().max(1e-6);
            assert!(rel < 1e-4, "relative defect {rel:e}");
        }
    }

    #[test]
    fn project_spin_slices() {
        let mut rng = ChaCha8Rng::seed_from_u64(101);
        let coeffs = random_coeffs(4, &mut rng);
        let right = project_spin(&coeffs, SpinSide::Right, 0);
        for (l, m, s) in coeffs.indices() {
            let expect = if s == 0 { coeffs.get(l, m, s) } else { C::new(0.0, 0.0) };
            assert_eq!(right.get(l, m, s), expect);
        }
        // Projecting a delta on both of its own indices leaves it unchanged.
        let delta = SpectralCoefficients::<f64>::delta(3, 3, 1, -1).unwrap();
        let kept = project_spin(&project_spin(&delta, SpinSide::Left, 1), SpinSide::Right, -1);
        assert!(kept.max_abs_diff(&delta) < 1e-15);
    }

    #[test]
    fn right_projection_has_pure_right_spin() {
        let mut rng = ChaCha8Rng::seed_from_u64(103);
        let coeffs = random_coeffs(4, &mut rng);
        let two_k = 2; // k = 1
        let proj = project_spin(&coeffs, SpinSide::Right, two_k);
        let f = synthesize(&proj);
        for _ in 0..50 {
            let g: Su2Element<f64> = haar_sample(&mut rng);
            let psi: f64 = rng.gen_range(0.0..12.0);
            let moved = f(&g.mul(&Su2Element::g3(psi)));
            let expect = f(&g) * C::from_polar(1.0, -(two_k as f64) / 2.0 * psi);
            assert!((moved - expect).norm() < 1e-9);
        }
    }

    #[test]
    fn spin_measure_examples() {
        // Single basis function: all measures are deltas.
        let delta = SpectralCoefficients::<f64>::delta(2, 2, 0, 2).unwrap();
        let measures = spin_measures(&delta).unwrap();
        assert!((measures.total[&(2, 0, 2)] - 1.0).abs() < 1e-15);
        assert!((measures.right[&2] - 1.0).abs() < 1e-15);
        assert!((measures.left[&0] - 1.0).abs() < 1e-15);
        assert!(measures.normalization_defect() < 1e-12);

        // Two equal-magnitude coefficients at s = +-1: RS uniform.
        let mut two = SpectralCoefficients::<f64>::zeros(2).unwrap();
        let r = 1.0 / 2.0f64.sqrt();
        two.set(2, 0, 2, C::new(r, 0.0));
        two.set(2, 0, -2, C::new(0.0, r));
        let measures = spin_measures(&two).unwrap();
        assert!((measures.right[&2] - 0.5).abs() < 1e-12);
        assert!((measures.right[&-2] - 0.5).abs() < 1e-12);

        // Random coefficients: all four measures normalize.
        let mut rng = ChaCha8Rng::seed_from_u64(111);
        let coeffs = random_coeffs(3, &mut rng);
        let measures = spin_measures(&coeffs).unwrap();
        assert!(measures.normalization_defect() < 1e-12);
        for v in measures.total.values() {
            assert!(*v >= 0.0);
        }

        assert!(matches!(
            spin_measures(&SpectralCoefficients::<f64>::zeros(2).unwrap()),
            Err(Error::ZeroField)
        ));
    }
}
