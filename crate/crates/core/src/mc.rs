//! Monte Carlo estimators for second moments of random coefficient fields,
//! plus deterministic oracles (closed forms and quadrature) to check them
//! against.
//!
//! Determinism policy: every sample `i` draws from its own ChaCha substream
//! (`seed_from_u64(seed)` + `set_stream(i)`), and parallel reductions merge
//! fixed chunks in ascending order, so results are bit-identical for a given
//! seed regardless of thread count.

use crate::error::{Error, Result};
use crate::fields::basis_vector;
use crate::grid::QuadratureGrid;
use crate::group::haar_sample;
use crate::half::{check_indices, dim, labels, offset};
use crate::linalg::{singular_values, CMatrix};
use crate::scalar::Real;
use crate::transform::{spin_measures, SpectralCoefficients};
use crate::wigner::wigner_matrix;
use num_complex::Complex;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use std::collections::BTreeMap;

/// Samples per reduction chunk; fixed so the merge order (and therefore the
/// floating-point result) does not depend on the thread count.
const CHUNK: usize = 1024;

/// Acceptance slack in standard errors for Monte Carlo checks.
const SIGMA_FACTOR: f64 = 5.0;

/// Absolute floor added to every Monte Carlo tolerance, so exact-zero
/// comparisons (e.g. deterministic per-sample identities) still pass.
const ABS_FLOOR: f64 = 1e-12;

/// Independent per-sample random stream.
pub fn substream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// One coefficient pair whose correlation and pseudo-correlation are to be
/// estimated, with predicted values supplied by the caller.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationTarget<T> {
    pub a: (i32, i32, i32),
    pub b: (i32, i32, i32),
    /// Predicted `E{ a_A conj(a_B) }`.
    pub predicted_corr: Complex<T>,
    /// Predicted `E{ a_A a_B }`.
    pub predicted_pseudo: Complex<T>,
}

impl<T: Real> CorrelationTarget<T> {
    /// Target for coefficients of a Haar-distributed matrix sample, with the
    /// closed-form predictions filled in.
    pub fn haar(a: (i32, i32, i32), b: (i32, i32, i32)) -> Self {
        let (corr, pseudo) = haar_pair_moment_closed_form(a, b);
        CorrelationTarget {
            a,
            b,
            predicted_corr: corr,
            predicted_pseudo: pseudo,
        }
    }
}

/// Estimates for one target.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationRow<T> {
    pub target: CorrelationTarget<T>,
    pub est_corr: Complex<T>,
    pub stderr_corr: T,
    pub est_pseudo: Complex<T>,
    pub stderr_pseudo: T,
    pub pass_corr: bool,
    pub pass_pseudo: bool,
}

impl<T: Real> CorrelationRow<T> {
    pub fn pass(&self) -> bool {
        self.pass_corr && self.pass_pseudo
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationReport<T> {
    pub samples: usize,
    pub rows: Vec<CorrelationRow<T>>,
}

impl<T: Real> CorrelationReport<T> {
    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(CorrelationRow::pass)
    }
}

#[derive(Clone)]
struct PairAcc<T> {
    sum_corr: Complex<T>,
    sumsq_corr: T,
    sum_pseudo: Complex<T>,
    sumsq_pseudo: T,
}

impl<T: Real> PairAcc<T> {
    fn zero() -> Self {
        PairAcc {
            sum_corr: Complex::new(T::zero(), T::zero()),
            sumsq_corr: T::zero(),
            sum_pseudo: Complex::new(T::zero(), T::zero()),
            sumsq_pseudo: T::zero(),
        }
    }

    fn push(&mut self, corr: Complex<T>, pseudo: Complex<T>) {
        self.sum_corr += corr;
        self.sumsq_corr += corr.norm_sqr();
        self.sum_pseudo += pseudo;
        self.sumsq_pseudo += pseudo.norm_sqr();
    }

    fn merge(&mut self, other: &Self) {
        self.sum_corr += other.sum_corr;
        self.sumsq_corr += other.sumsq_corr;
        self.sum_pseudo += other.sum_pseudo;
        self.sumsq_pseudo += other.sumsq_pseudo;
    }
}

/// Standard error of the mean of complex samples from streaming sums:
/// `sqrt(var / n)` with `var = (sum|z|^2 - |sum z|^2 / n) / (n - 1)`.
fn mean_stderr<T: Real>(sum: Complex<T>, sumsq: T, n: usize) -> (Complex<T>, T) {
    let nt = T::from_i32_exact(n as i32);
    let mean = sum / nt;
    if n < 2 {
        return (mean, T::zero());
    }
    let var = ((sumsq - sum.norm_sqr() / nt) / (nt - T::one())).max(T::zero());
    (mean, (var / nt).sqrt())
}

fn mc_pass<T: Real>(est: Complex<T>, pred: Complex<T>, stderr: T) -> bool {
    (est - pred).norm()
        <= T::from_f64(SIGMA_FACTOR).unwrap() * stderr + T::from_f64(ABS_FLOOR).unwrap()
}

/// Estimate `E{ a_A conj(a_B) }` and `E{ a_A a_B }` for each target by Monte
/// Carlo over `n` independent samples of `generator`.
///
/// A row passes when `|est - pred| <= 5 stderr + 1e-12`.
pub fn estimate_correlations<T, F>(
    generator: F,
    seed: u64,
    n: usize,
    targets: &[CorrelationTarget<T>],
) -> Result<CorrelationReport<T>>
where
    T: Real,
    F: Fn(&mut ChaCha8Rng) -> Result<SpectralCoefficients<T>> + Sync,
{
    if n < 100 {
        return Err(Error::InvalidSpec(
            "correlation estimation needs at least 100 samples".into(),
        ));
    }
    for t in targets {
        let (la, ma, sa) = t.a;
        let (lb, mb, sb) = t.b;
        check_indices(la, ma, sa)?;
        check_indices(lb, mb, sb)?;
    }

    let n_chunks = n.div_ceil(CHUNK);
    let partials: Vec<Vec<PairAcc<T>>> = (0..n_chunks)
        .into_par_iter()
        .map(|chunk| -> Result<Vec<PairAcc<T>>> {
            let lo = chunk * CHUNK;
            let hi = ((chunk + 1) * CHUNK).min(n);
            let mut acc = vec![PairAcc::zero(); targets.len()];
            for i in lo..hi {
                let mut rng = substream(seed, i as u64);
                let coeffs = generator(&mut rng)?;
                for (t, a) in targets.iter().zip(acc.iter_mut()) {
                    let max_l = t.a.0.max(t.b.0);
                    if max_l > coeffs.two_big_l {
                        return Err(Error::BandLimitExceeded {
                            two_ell: max_l,
                            cap: coeffs.two_big_l,
                        });
                    }
                    let za = coeffs.get(t.a.0, t.a.1, t.a.2);
                    let zb = coeffs.get(t.b.0, t.b.1, t.b.2);
                    a.push(za * zb.conj(), za * zb);
                }
            }
            Ok(acc)
        })
        .collect::<Result<_>>()?;

    let mut total = vec![PairAcc::zero(); targets.len()];
    for part in &partials {
        for (t, p) in total.iter_mut().zip(part) {
            t.merge(p);
        }
    }

    let rows = targets
        .iter()
        .zip(total)
        .map(|(target, acc)| {
            let (est_corr, stderr_corr) = mean_stderr(acc.sum_corr, acc.sumsq_corr, n);
            let (est_pseudo, stderr_pseudo) = mean_stderr(acc.sum_pseudo, acc.sumsq_pseudo, n);
            CorrelationRow {
                pass_corr: mc_pass(est_corr, target.predicted_corr, stderr_corr),
                pass_pseudo: mc_pass(est_pseudo, target.predicted_pseudo, stderr_pseudo),
                target: target.clone(),
                est_corr,
                stderr_corr,
                est_pseudo,
                stderr_pseudo,
            }
        })
        .collect();

    Ok(CorrelationReport { samples: n, rows })
}

/// Closed-form Haar pair moments for matrix coefficients
/// (`gamma` Haar, `a = D^l(gamma)` entrywise):
/// `E{ D_A conj(D_B) } = delta_{A,B} / (2l+1)` and
/// `E{ D_A D_B } = delta_{l,l'} delta_{m,-m'} delta_{s,-s'} (-1)^{m-s} / (2l+1)`.
pub fn haar_pair_moment_closed_form<T: Real>(
    a: (i32, i32, i32),
    b: (i32, i32, i32),
) -> (Complex<T>, Complex<T>) {
    let zero = Complex::new(T::zero(), T::zero());
    let (la, ma, sa) = a;
    let (lb, mb, sb) = b;
    let inv_dim = T::one() / T::from_i32_exact(la + 1);
    let corr = if la == lb && ma == mb && sa == sb {
        Complex::new(inv_dim, T::zero())
    } else {
        zero
    };
    let pseudo = if la == lb && ma == -mb && sa == -sb {
        // (-1)^(m - s); m - s is always an integer.
        let sign = if ((ma - sa) / 2).rem_euclid(2) == 0 {
            T::one()
        } else {
            -T::one()
        };
        Complex::new(sign * inv_dim, T::zero())
    } else {
        zero
    };
    (corr, pseudo)
}

/// Deterministic quadrature route to the same pair moments: integrate the
/// product of matrix coefficients over the group and divide by the volume.
/// Exact (up to roundoff) whenever both degrees are within the grid's band
/// limit.
pub fn haar_pair_moment_quadrature<T: Real>(
    grid: &QuadratureGrid<T>,
    a: (i32, i32, i32),
    b: (i32, i32, i32),
) -> Result<(Complex<T>, Complex<T>)> {
    check_indices(a.0, a.1, a.2)?;
    check_indices(b.0, b.1, b.2)?;
    let max_l = a.0.max(b.0);
    if max_l > grid.two_big_l {
        return Err(Error::BandLimitExceeded {
            two_ell: max_l,
            cap: grid.two_big_l,
        });
    }
    let mut sum_corr = Complex::new(T::zero(), T::zero());
    let mut sum_pseudo = Complex::new(T::zero(), T::zero());
    for node in &grid.nodes {
        let da = wigner_matrix(a.0, &node.element)?;
        let za = da.get(a.1, a.2);
        let zb = if b.0 == a.0 {
            da.get(b.1, b.2)
        } else {
            wigner_matrix(b.0, &node.element)?.get(b.1, b.2)
        };
        sum_corr += (za * zb.conj()) * node.weight;
        sum_pseudo += (za * zb) * node.weight;
    }
    let volume = T::from_i32_exact(16) * T::PI() * T::PI();
    Ok((sum_corr / volume, sum_pseudo / volume))
}

/// Closed-form second moments of one shared Haar rotation applied to two
/// fixed vectors (`x = D^l(gamma) v`, `y = D^l(gamma) v'`):
/// `E{ x_i conj(y_j) } = delta_{ij} <v', v> / (2l+1)` and
/// `E{ x_i y_j } = delta_{i,-j} sum_k (-1)^(i-k) v_k v'_{-k} / (2l+1)`.
pub fn schur_moment_closed_form<T: Real>(
    two_ell: i32,
    v: &[Complex<T>],
    vprime: &[Complex<T>],
    two_i: i32,
    two_j: i32,
) -> (Complex<T>, Complex<T>) {
    let zero = Complex::new(T::zero(), T::zero());
    let inv_dim = T::one() / T::from_i32_exact(two_ell + 1);
    let corr = if two_i == two_j {
        let mut ip = zero;
        for two_k in labels(two_ell) {
            ip += v[offset(two_ell, two_k)] * vprime[offset(two_ell, two_k)].conj();
        }
        ip * inv_dim
    } else {
        zero
    };
    let pseudo = if two_j == -two_i {
        let mut acc = zero;
        for two_k in labels(two_ell) {
            let sign = if ((two_i - two_k) / 2).rem_euclid(2) == 0 {
                T::one()
            } else {
                -T::one()
            };
            acc += v[offset(two_ell, two_k)] * vprime[offset(two_ell, -two_k)] * sign;
        }
        acc * inv_dim
    } else {
        zero
    };
    (corr, pseudo)
}

/// Degree-`l` pseudo pairing of a coefficient set with itself,
/// `Q_l = sum_{k,l'} (-1)^(k-l') A_{k,l'} A_{-k,-l'}`. This equals the
/// integral of the squared degree-`l` component of the synthesized field
/// over the group, which is the quadrature route to the same number.
pub fn pseudo_pairing<T: Real>(coeffs: &SpectralCoefficients<T>, two_ell: i32) -> Complex<T> {
    let mut acc = Complex::new(T::zero(), T::zero());
    if two_ell > coeffs.two_big_l {
        return acc;
    }
    for two_k in labels(two_ell) {
        for two_l in labels(two_ell) {
            let sign = if ((two_k - two_l) / 2).rem_euclid(2) == 0 {
                T::one()
            } else {
                -T::one()
            };
            acc += coeffs.get(two_ell, two_k, two_l) * coeffs.get(two_ell, -two_k, -two_l) * sign;
        }
    }
    acc
}

/// Quadrature route to the same moments: integrate
/// `(D(g) v)_i conj((D(g) v')_j)` and `(D(g) v)_i (D(g) v')_j` over the
/// group and divide by the volume, returning the full `(i, j)` matrices.
/// Exact (up to roundoff) whenever `2 * two_ell` is within the grid's band
/// limit, since each integrand is a polynomial of coefficients of degree at
/// most `2l`.
pub fn schur_moment_quadrature<T: Real>(
    grid: &QuadratureGrid<T>,
    two_ell: i32,
    v: &[Complex<T>],
    vprime: &[Complex<T>],
) -> Result<(CMatrix<T>, CMatrix<T>)> {
    if 2 * two_ell > grid.two_big_l {
        return Err(Error::BandLimitExceeded {
            two_ell: 2 * two_ell,
            cap: grid.two_big_l,
        });
    }
    let n = dim(two_ell);
    if v.len() != n || vprime.len() != n {
        return Err(Error::InvalidSpec(format!(
            "schur vectors must have length {n} at two_ell={two_ell}"
        )));
    }
    let mut corr = CMatrix::zeros(n, n);
    let mut pseudo = CMatrix::zeros(n, n);
    for node in &grid.nodes {
        let d = wigner_matrix(two_ell, &node.element)?;
        let x = d.entries.mul_vec(v);
        let y = d.entries.mul_vec(vprime);
        for i in 0..n {
            for j in 0..n {
                corr[(i, j)] += x[i] * y[j].conj() * node.weight;
                pseudo[(i, j)] += x[i] * y[j] * node.weight;
            }
        }
    }
    let inv_volume = T::one() / (T::from_i32_exact(16) * T::PI() * T::PI());
    for z in corr.as_mut_slice() {
        *z *= inv_volume;
    }
    for z in pseudo.as_mut_slice() {
        *z *= inv_volume;
    }
    Ok((corr, pseudo))
}

/// Second moments of a template invariantized by one Haar left rotation
/// (`A' = conj(D(gamma)) A`): correlations carry the `delta_{m,m'}` + column
/// Gram structure, pseudo-correlations the `delta_{-m,m'}` structure.
pub fn left_rotated_pair_moment_closed_form<T: Real>(
    template: &SpectralCoefficients<T>,
    a: (i32, i32, i32),
    b: (i32, i32, i32),
) -> (Complex<T>, Complex<T>) {
    let zero = Complex::new(T::zero(), T::zero());
    if a.0 != b.0 {
        return (zero, zero);
    }
    let two_ell = a.0;
    let col = |two_s: i32| -> Vec<Complex<T>> {
        labels(two_ell)
            .map(|two_k| template.get(two_ell, two_k, two_s).conj())
            .collect()
    };
    let (corr, pseudo) = schur_moment_closed_form(two_ell, &col(a.2), &col(b.2), a.1, b.1);
    (corr.conj(), pseudo.conj())
}

/// Second moments of a template invariantized by one Haar right rotation
/// (`A' = A D(gamma)^T`): mirrored structure across rows.
pub fn right_rotated_pair_moment_closed_form<T: Real>(
    template: &SpectralCoefficients<T>,
    a: (i32, i32, i32),
    b: (i32, i32, i32),
) -> (Complex<T>, Complex<T>) {
    let zero = Complex::new(T::zero(), T::zero());
    if a.0 != b.0 {
        return (zero, zero);
    }
    let two_ell = a.0;
    let row = |two_m: i32| -> Vec<Complex<T>> {
        labels(two_ell)
            .map(|two_l| template.get(two_ell, two_m, two_l))
            .collect()
    };
    schur_moment_closed_form(two_ell, &row(a.1), &row(b.1), a.2, b.2)
}

/// Second moments of a template invariantized by two independent Haar
/// rotations (`A' = conj(D(gamma_1)) A D(gamma_2)^T`):
/// `E{a_A conj(a_B)} = delta_{A,B} ||A^l||_F^2 / (2l+1)^2` and
/// `E{a_A a_B} = delta_{l,l'} delta_{m,-m'} delta_{s,-s'} (-1)^(m-s)
///  Q_l / (2l+1)^2` with `Q_l` the [`pseudo_pairing`] of the template.
pub fn bi_rotated_pair_moment_closed_form<T: Real>(
    template: &SpectralCoefficients<T>,
    a: (i32, i32, i32),
    b: (i32, i32, i32),
) -> (Complex<T>, Complex<T>) {
    let zero = Complex::new(T::zero(), T::zero());
    if a.0 != b.0 {
        return (zero, zero);
    }
    let two_ell = a.0;
    let inv_dim_sq = {
        let d = T::from_i32_exact(two_ell + 1);
        T::one() / (d * d)
    };
    let corr = if a == b {
        let frob = template.blocks[two_ell as usize]
            .as_slice()
            .iter()
            .fold(T::zero(), |acc, z| acc + z.norm_sqr());
        Complex::new(frob * inv_dim_sq, T::zero())
    } else {
        zero
    };
    let pseudo = if a.1 == -b.1 && a.2 == -b.2 {
        let sign = if ((a.1 - a.2) / 2).rem_euclid(2) == 0 {
            T::one()
        } else {
            -T::one()
        };
        pseudo_pairing(template, two_ell) * (sign * inv_dim_sq)
    } else {
        zero
    };
    (corr, pseudo)
}

/// Generator for the canonical Haar matrix-coefficient process: one Haar
/// element per sample, every block set to its Wigner matrix.
pub fn wigner_sample_generator<T>(
    two_big_l: i32,
) -> impl Fn(&mut ChaCha8Rng) -> Result<SpectralCoefficients<T>> + Sync
where
    T: Real,
    StandardNormal: Distribution<T>,
{
    move |rng| {
        let gamma = haar_sample(rng);
        let mut out = SpectralCoefficients::zeros(two_big_l)?;
        for d in 0..=two_big_l {
            out.blocks[d as usize] = wigner_matrix(d, &gamma)?.entries;
        }
        Ok(out)
    }
}

/// How spin-measure estimates average over samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeasureMode {
    /// Ratio of expectations: `sum_i |a_i|^2 / sum_i ||X_i||^2`.
    Weak,
    /// Expectation of ratios: `mean_i (|a_i|^2 / ||X_i||^2)`.
    Strong,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MassEstimate<T> {
    pub mass: T,
    pub stderr: T,
}

/// Estimated spin measures with per-index standard errors.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimatedSpinMeasures<T> {
    pub mode: MeasureMode,
    /// Total sample count requested (including any zero-norm samples).
    pub samples: usize,
    /// Samples that actually contributed (nonzero norm).
    pub effective_samples: usize,
    pub total: BTreeMap<(i32, i32, i32), MassEstimate<T>>,
    pub left: BTreeMap<i32, MassEstimate<T>>,
    pub right: BTreeMap<i32, MassEstimate<T>>,
    pub bi: BTreeMap<(i32, i32), MassEstimate<T>>,
}

#[derive(Clone, Copy)]
struct RatioAcc<T> {
    /// Strong mode: sum of per-sample ratios. Weak mode: sum of numerators.
    s1: T,
    /// Strong: sum of squared ratios. Weak: sum of squared numerators.
    s2: T,
    /// Weak mode only: sum of numerator * denominator cross terms.
    sxy: T,
}

impl<T: Real> RatioAcc<T> {
    fn zero() -> Self {
        RatioAcc {
            s1: T::zero(),
            s2: T::zero(),
            sxy: T::zero(),
        }
    }

    fn push(&mut self, mode: MeasureMode, mass: T, norm: T) {
        match mode {
            MeasureMode::Strong => {
                // `mass` is already the normalized per-sample ratio.
                self.s1 += mass;
                self.s2 += mass * mass;
            }
            MeasureMode::Weak => {
                let x = mass * norm;
                self.s1 += x;
                self.s2 += x * x;
                self.sxy += x * norm;
            }
        }
    }

    fn finalize(&self, mode: MeasureMode, n: usize, sy: T, syy: T) -> MassEstimate<T> {
        let nt = T::from_i32_exact(n as i32);
        match mode {
            MeasureMode::Strong => {
                let mass = self.s1 / nt;
                let stderr = if n < 2 {
                    T::zero()
                } else {
                    let var = ((self.s2 - self.s1 * self.s1 / nt) / (nt - T::one())).max(T::zero());
                    (var / nt).sqrt()
                };
                MassEstimate { mass, stderr }
            }
            MeasureMode::Weak => {
                let mass = self.s1 / sy;
                let stderr = if n < 2 {
                    T::zero()
                } else {
                    // Linearized ratio variance: with z_j = x_j - R y_j the
                    // sample mean of z is exactly 0, so
                    // var(z) = (sum x^2 - 2R sum xy + R^2 sum y^2) / (n-1).
                    let var = ((self.s2 - (T::one() + T::one()) * mass * self.sxy
                        + mass * mass * syy)
                        / (nt - T::one()))
                    .max(T::zero());
                    let ybar = sy / nt;
                    (var / nt).sqrt() / ybar
                };
                MassEstimate { mass, stderr }
            }
        }
    }
}

/// Estimate total/left/right/bi spin measures by Monte Carlo.
///
/// Errors with [`Error::ZeroField`] if every sample has zero norm; zero-norm
/// samples are otherwise skipped (they carry no mass information).
pub fn estimate_spin_measures<T, F>(
    generator: F,
    seed: u64,
    n: usize,
    mode: MeasureMode,
) -> Result<EstimatedSpinMeasures<T>>
where
    T: Real,
    F: Fn(&mut ChaCha8Rng) -> Result<SpectralCoefficients<T>>,
{
    if n < 100 {
        return Err(Error::InvalidSpec(
            "spin-measure estimation needs at least 100 samples".into(),
        ));
    }
    let mut total: BTreeMap<(i32, i32, i32), RatioAcc<T>> = BTreeMap::new();
    let mut left: BTreeMap<i32, RatioAcc<T>> = BTreeMap::new();
    let mut right: BTreeMap<i32, RatioAcc<T>> = BTreeMap::new();
    let mut bi: BTreeMap<(i32, i32), RatioAcc<T>> = BTreeMap::new();
    let mut band: Option<i32> = None;
    let mut sy = T::zero();
    let mut syy = T::zero();
    let mut n_eff = 0usize;

    for i in 0..n {
        let mut rng = substream(seed, i as u64);
        let coeffs = generator(&mut rng)?;
        match band {
            None => band = Some(coeffs.two_big_l),
            Some(b) if b != coeffs.two_big_l => {
                return Err(Error::InvalidSpec(
                    "generator changed band limit between samples".into(),
                ));
            }
            _ => {}
        }
        let norm = coeffs.norm_sq();
        if norm <= T::zero() {
            continue;
        }
        n_eff += 1;
        sy += norm;
        syy += norm * norm;
        let ms = spin_measures(&coeffs)?;
        for (k, v) in ms.total {
            total.entry(k).or_insert_with(RatioAcc::zero).push(mode, v, norm);
        }
        for (k, v) in ms.left {
            left.entry(k).or_insert_with(RatioAcc::zero).push(mode, v, norm);
        }
        for (k, v) in ms.right {
            right.entry(k).or_insert_with(RatioAcc::zero).push(mode, v, norm);
        }
        for (k, v) in ms.bi {
            bi.entry(k).or_insert_with(RatioAcc::zero).push(mode, v, norm);
        }
    }

    if n_eff == 0 {
        return Err(Error::ZeroField);
    }

    let fin = |acc: &RatioAcc<T>| acc.finalize(mode, n_eff, sy, syy);
    Ok(EstimatedSpinMeasures {
        mode,
        samples: n,
        effective_samples: n_eff,
        total: total.iter().map(|(k, a)| (*k, fin(a))).collect(),
        left: left.iter().map(|(k, a)| (*k, fin(a))).collect(),
        right: right.iter().map(|(k, a)| (*k, fin(a))).collect(),
        bi: bi.iter().map(|(k, a)| (*k, fin(a))).collect(),
    })
}

/// Results of the orbit diagnostics for one `(l, s)` pair.
#[derive(Debug, Clone, PartialEq)]
pub struct OrbitReport<T> {
    pub two_ell: i32,
    pub two_s: i32,
    /// Max `||D(g_3(psi)) e_s - e_s||` over the stabilizer sample.
    pub isotropy_defect: T,
    pub isotropy_pass: bool,
    /// `||D(g) e_s - e_s||` for a Haar-random `g`.
    pub movement: T,
    pub movement_pass: bool,
    /// `sigma_min / sigma_max` of `2l+1` random orbit points as columns.
    pub span_ratio: T,
    pub span_pass: bool,
}

impl<T: Real> OrbitReport<T> {
    pub fn all_pass(&self) -> bool {
        self.isotropy_pass && self.movement_pass && self.span_pass
    }
}

fn vec_dist<T: Real>(a: &[Complex<T>], b: &[Complex<T>]) -> T {
    let mut acc = T::zero();
    for (x, y) in a.iter().zip(b) {
        acc += (*x - *y).norm_sqr();
    }
    acc.sqrt()
}

/// Orbit diagnostics for the basis vector `e_s` in degree `l`:
///
/// - isotropy: the diagonal circle elements that must fix `e_s` do so — for
///   `s != 0` the stabilizer sample is `psi_k = 4 pi k / (2s)`, `k = 1..2|s|`
///   (tolerance 1e-10); for `s = 0` the whole diagonal circle fixes `e_s`
///   and random `psi` are used;
/// - movement: a Haar-random rotation moves `e_s` by a non-negligible amount;
/// - span: `2l+1` random orbit points of a random unit vector are linearly
///   independent (`sigma_min / sigma_max > 1e-8`).
pub fn orbit_checks<T>(two_ell: i32, two_s: i32, seed: u64) -> Result<OrbitReport<T>>
where
    T: Real,
    StandardNormal: Distribution<T>,
{
    check_indices(two_ell, two_s, two_s)?;
    let mut rng = substream(seed, 0);
    let e_s = basis_vector::<T>(two_ell, two_s);
    let n = dim(two_ell);

    // Stabilizer sample.
    let psis: Vec<T> = if two_s != 0 {
        (1..=two_s.abs())
            .map(|k| {
                T::from_i32_exact(4 * k) * T::PI() / T::from_i32_exact(two_s)
            })
            .collect()
    } else {
        use rand::Rng;
        (0..8)
            .map(|_| T::from_f64(rng.gen_range(0.0..1.0)).unwrap() * T::from_i32_exact(4) * T::PI())
            .collect()
    };
    let mut isotropy_defect = T::zero();
    for psi in psis {
        let g = crate::group::Su2Element::g3(psi);
        let d = wigner_matrix(two_ell, &g)?;
        let image = d.entries.mul_vec(&e_s);
        isotropy_defect = isotropy_defect.max(vec_dist(&image, &e_s));
    }
    let isotropy_pass = isotropy_defect <= T::from_f64(1e-10).unwrap();

    // A generic rotation moves e_s.
    let g = haar_sample(&mut rng);
    let d = wigner_matrix(two_ell, &g)?;
    let movement = vec_dist(&d.entries.mul_vec(&e_s), &e_s);
    let movement_pass = movement > T::from_f64(1e-6).unwrap();

    // Orbit of a random unit vector spans the representation space.
    let mut v: Vec<Complex<T>> = (0..n)
        .map(|_| crate::fields::complex_gaussian(&mut rng, T::one()))
        .collect();
    let vnorm = v.iter().fold(T::zero(), |a, z| a + z.norm_sqr()).sqrt();
    for z in &mut v {
        *z /= vnorm;
    }
    let mut m = CMatrix::zeros(n, n);
    for j in 0..n {
        let gj = haar_sample(&mut rng);
        let col = wigner_matrix(two_ell, &gj)?.entries.mul_vec(&v);
        for (i, z) in col.into_iter().enumerate() {
            m[(i, j)] = z;
        }
    }
    let sv = singular_values(&m);
    let span_ratio = if sv.is_empty() || sv[sv.len() - 1] <= T::zero() {
        T::zero()
    } else {
        sv[0] / sv[sv.len() - 1]
    };
    let span_pass = span_ratio > T::from_f64(1e-8).unwrap();

    Ok(OrbitReport {
        two_ell,
        two_s,
        isotropy_defect,
        isotropy_pass,
        movement,
        movement_pass,
        span_ratio,
        span_pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{
        gen_gaussian_bi_invariant, realize_spin_measure, CovarianceSpec, InvarianceFamily,
        SpinMeasure,
    };
    use crate::grid::build_grid;

    type C = Complex<f64>;

    #[test]
    fn haar_moments_match_closed_form_and_quadrature() {
        // Dual route: the quadrature oracle must agree with the closed form
        // to near machine precision, and the Monte Carlo estimate must agree
        // with both within 5 standard errors.
        let pairs = [
            ((1, 1, 1), (1, 1, 1)),
            ((1, 1, 1), (1, -1, -1)),
            ((2, 0, 2), (2, 0, 2)),
            ((3, 1, 1), (3, 1, 1)),
            ((3, 3, 1), (3, -3, -1)),
            ((1, 1, 1), (3, 1, 1)),
            ((2, 2, 0), (2, 0, 0)),
        ];
        let grid = build_grid::<f64>(3).unwrap();
        let targets: Vec<CorrelationTarget<f64>> = pairs
            .iter()
            .map(|&(a, b)| {
                let t = CorrelationTarget::haar(a, b);
                let (qcorr, qpseudo) = haar_pair_moment_quadrature(&grid, a, b).unwrap();
                assert!(
                    (qcorr - t.predicted_corr).norm() < 1e-10,
                    "corr quadrature mismatch at {a:?} {b:?}: {qcorr}"
                );
                assert!(
                    (qpseudo - t.predicted_pseudo).norm() < 1e-10,
                    "pseudo quadrature mismatch at {a:?} {b:?}: {qpseudo}"
                );
                t
            })
            .collect();

        // Spot-check the corrected pseudo-correlation signs.
        assert_eq!(targets[1].predicted_pseudo, C::new(0.5, 0.0));
        assert_eq!(targets[4].predicted_pseudo, C::new(-0.25, 0.0));

        let report =
            estimate_correlations(wigner_sample_generator::<f64>(3), 11, 3000, &targets).unwrap();
        for row in &report.rows {
            assert!(
                row.pass(),
                "target {:?}/{:?}: est {} pred {} (se {}) ; pseudo {} pred {} (se {})",
                row.target.a,
                row.target.b,
                row.est_corr,
                row.target.predicted_corr,
                row.stderr_corr,
                row.est_pseudo,
                row.target.predicted_pseudo,
                row.stderr_pseudo
            );
        }
    }

    #[test]
    fn bi_invariant_moments_pass() {
        let spec = CovarianceSpec::BiInvariant {
            two_big_l: 2,
            sigma_sq: vec![1.0, 0.5, 0.25],
        };
        let targets = vec![
            CorrelationTarget {
                a: (2, 2, 0),
                b: (2, 2, 0),
                predicted_corr: C::new(0.25, 0.0),
                predicted_pseudo: C::new(0.0, 0.0),
            },
            CorrelationTarget {
                a: (2, 2, 0),
                b: (2, 0, 0),
                predicted_corr: C::new(0.0, 0.0),
                predicted_pseudo: C::new(0.0, 0.0),
            },
            CorrelationTarget {
                a: (1, 1, 1),
                b: (1, 1, 1),
                predicted_corr: C::new(0.5, 0.0),
                predicted_pseudo: C::new(0.0, 0.0),
            },
        ];
        let gen = |rng: &mut ChaCha8Rng| gen_gaussian_bi_invariant(&spec, rng);
        let report = estimate_correlations(gen, 13, 3000, &targets).unwrap();
        assert!(report.all_pass());
    }

    #[test]
    fn estimator_is_deterministic() {
        let targets = vec![CorrelationTarget::haar((1, 1, 1), (1, 1, 1))];
        let a = estimate_correlations(wigner_sample_generator::<f64>(1), 5, 500, &targets).unwrap();
        let b = estimate_correlations(wigner_sample_generator::<f64>(1), 5, 500, &targets).unwrap();
        assert_eq!(a, b);
        let c = estimate_correlations(wigner_sample_generator::<f64>(1), 6, 500, &targets).unwrap();
        assert_ne!(a.rows[0].est_corr, c.rows[0].est_corr);
    }

    #[test]
    fn spin_measure_estimators_recover_exact_measure() {
        let mu = SpinMeasure::<f64> {
            two_ell: 2,
            masses: vec![0.2, 0.3, 0.5],
        };
        let gen = |rng: &mut ChaCha8Rng| realize_spin_measure(&mu, rng);
        for mode in [MeasureMode::Strong, MeasureMode::Weak] {
            let est = estimate_spin_measures(gen, 17, 100, mode).unwrap();
            assert_eq!(est.effective_samples, 100);
            for (idx, two_s) in labels(2).enumerate() {
                let e = est.right[&two_s];
                assert!(
                    (e.mass - mu.masses[idx]).abs() < 1e-10,
                    "mode {mode:?} s {two_s}: {}",
                    e.mass
                );
                // The per-sample ratios are identical up to rounding, so the
                // true spread is zero; the streaming variance only resolves
                // that down to cancellation noise of order sqrt(eps).
                assert!(e.stderr < 1e-6);
            }
            // Marginals are probability vectors.
            let sum: f64 = est.left.values().map(|e| e.mass).sum();
            assert!((sum - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn weak_and_strong_differ_for_varying_norms() {
        // Mix two deterministic fields with different norms and different
        // right spins: weak weights by norm, strong does not.
        let gen = |rng: &mut ChaCha8Rng| {
            use rand::Rng;
            let pick: bool = rng.gen();
            let mut c = SpectralCoefficients::<f64>::zeros(2)?;
            if pick {
                c.set(2, 0, 2, C::new(2.0, 0.0)); // norm 4, spin +1
            } else {
                c.set(2, 0, -2, C::new(1.0, 0.0)); // norm 1, spin -1
            }
            Ok(c)
        };
        let n = 4000;
        let weak = estimate_spin_measures(gen, 23, n, MeasureMode::Weak).unwrap();
        let strong = estimate_spin_measures(gen, 23, n, MeasureMode::Strong).unwrap();
        // Strong: mean of per-sample deltas -> P(pick) ~ 1/2.
        let s = strong.right[&2];
        assert!((s.mass - 0.5).abs() < 5.0 * s.stderr + 1e-12);
        // Weak: norm-weighted -> 4 / (4 + 1) ~ 0.8.
        let w = weak.right[&2];
        assert!((w.mass - 0.8).abs() < 5.0 * w.stderr + 1e-2);
        assert!(w.mass > s.mass + 0.1);
    }

    #[test]
    fn zero_generator_errors() {
        let gen = |_rng: &mut ChaCha8Rng| SpectralCoefficients::<f64>::zeros(1);
        let err = estimate_spin_measures(gen, 1, 100, MeasureMode::Weak).unwrap_err();
        assert!(matches!(err, Error::ZeroField));
        // Sample-count precondition.
        let err = estimate_spin_measures(gen, 1, 10, MeasureMode::Weak).unwrap_err();
        assert!(matches!(err, Error::InvalidSpec(_)));
    }

    #[test]
    fn rotated_template_moments_match_monte_carlo() {
        // Small-sample version of the invariantization moment identities:
        // closed forms against Monte Carlo for all three rotation families,
        // plus the quadrature route to the pseudo pairing Q_l.
        let mut template = SpectralCoefficients::<f64>::zeros(2).unwrap();
        template.set(2, 0, 0, C::new(1.0, 0.0));
        template.set(2, 2, -2, C::new(0.5, -0.25));
        template.set(2, -2, 0, C::new(0.0, 0.75));
        template.set(1, 1, -1, C::new(0.3, 0.4));

        // Quadrature route to Q_l: integrate the squared degree-l component.
        let grid = build_grid::<f64>(2).unwrap();
        for d in [1, 2] {
            let mut single = SpectralCoefficients::<f64>::zeros(2).unwrap();
            single.blocks[d as usize] = template.blocks[d as usize].clone();
            let f = crate::transform::synthesize(&single);
            let q_int = grid.integrate(|g| {
                let v = f(g);
                v * v
            });
            let q_sum = pseudo_pairing(&template, d);
            assert!(
                (q_int - q_sum).norm() < 1e-10,
                "degree {d}: quadrature {q_int} vs coefficient sum {q_sum}"
            );
        }

        let indices = [(2, 0, 0), (2, 2, -2), (2, 0, -2), (1, 1, 1), (1, -1, 1)];
        for family in [
            InvarianceFamily::Left,
            InvarianceFamily::Right,
            InvarianceFamily::Bi,
        ] {
            let mut targets = Vec::new();
            for &a in &indices {
                for &b in &indices {
                    let (corr, pseudo) = match family {
                        InvarianceFamily::Left => {
                            left_rotated_pair_moment_closed_form(&template, a, b)
                        }
                        InvarianceFamily::Right => {
                            right_rotated_pair_moment_closed_form(&template, a, b)
                        }
                        InvarianceFamily::Bi => {
                            bi_rotated_pair_moment_closed_form(&template, a, b)
                        }
                    };
                    targets.push(CorrelationTarget {
                        a,
                        b,
                        predicted_corr: corr,
                        predicted_pseudo: pseudo,
                    });
                }
            }
            let gen =
                |rng: &mut ChaCha8Rng| crate::fields::gen_rotated(&template, family, rng);
            let report = estimate_correlations(gen, 53, 4000, &targets).unwrap();
            for row in &report.rows {
                assert!(
                    row.pass(),
                    "{family:?} {:?}/{:?}: corr est {} pred {} se {}; pseudo est {} pred {} se {}",
                    row.target.a,
                    row.target.b,
                    row.est_corr,
                    row.target.predicted_corr,
                    row.stderr_corr,
                    row.est_pseudo,
                    row.target.predicted_pseudo,
                    row.stderr_pseudo
                );
            }
        }
    }

    #[test]
    fn bi_rotated_normalized_harmonic_template_pins() {
        // Template with a single unit coefficient at (l, m, s) = (1, 0, 0):
        // variance 1/9 at every degree-1 pair and pseudo-correlation +1/9 at
        // (0, 0) (the diagonal pairing is positive for integer l).
        let template = SpectralCoefficients::<f64>::delta(2, 2, 0, 0).unwrap();
        let (corr, pseudo) =
            bi_rotated_pair_moment_closed_form(&template, (2, 0, 0), (2, 0, 0));
        assert!((corr - C::new(1.0 / 9.0, 0.0)).norm() < 1e-15);
        assert!((pseudo - C::new(1.0 / 9.0, 0.0)).norm() < 1e-15);
        let (corr, _) = bi_rotated_pair_moment_closed_form(&template, (2, 2, -2), (2, 2, -2));
        assert!((corr - C::new(1.0 / 9.0, 0.0)).norm() < 1e-15);
        // Half-integer degree: delta template at (1/2, 1/2, 1/2) has
        // Q = sum (-1)^(k-l) A_{k,l} A_{-k,-l} = 0 (no antidiagonal partner).
        let half = SpectralCoefficients::<f64>::delta(1, 1, 1, 1).unwrap();
        let (_, pseudo) = bi_rotated_pair_moment_closed_form(&half, (1, 1, 1), (1, -1, -1));
        assert_eq!(pseudo, C::new(0.0, 0.0));
    }

    #[test]
    fn orbit_checks_pass_for_examples() {
        for (two_ell, two_s) in [(2, 2), (1, 1), (4, -2), (2, 0), (6, 4)] {
            let report = orbit_checks::<f64>(two_ell, two_s, 29).unwrap();
            assert!(
                report.all_pass(),
                "(2l, 2s) = ({two_ell}, {two_s}): {report:?}"
            );
        }
        let a = orbit_checks::<f64>(2, 2, 31).unwrap();
        let b = orbit_checks::<f64>(2, 2, 31).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn schur_closed_form_examples() {
        // v = v' = e_0 at l = 1: corr = delta_ij <v,v>/3 = 1/3 at i = j = 0;
        // pseudo at (i, j) = (0, 0): sign (-1)^0 v_0 v'_0 / 3 = 1/3.
        let v = basis_vector::<f64>(2, 0);
        let (corr, pseudo) = schur_moment_closed_form(2, &v, &v, 0, 0);
        assert!((corr - C::new(1.0 / 3.0, 0.0)).norm() < 1e-15);
        assert!((pseudo - C::new(1.0 / 3.0, 0.0)).norm() < 1e-15);
        // Off-diagonal corr vanishes.
        let (corr, _) = schur_moment_closed_form(2, &v, &v, 2, 0);
        assert_eq!(corr, C::new(0.0, 0.0));
        // Orthogonal vectors: corr vanishes even on the diagonal.
        let w = basis_vector::<f64>(2, 2);
        let (corr, _) = schur_moment_closed_form(2, &v, &w, 0, 0);
        assert_eq!(corr, C::new(0.0, 0.0));
        // e_1 pair at l = 1, pseudo at (i, j) = (2, -2):
        // sign (-1)^((2-2)/2) v_1 v'_{-1} = 0 since v'_{-1} = 0.
        let (_, pseudo) = schur_moment_closed_form(2, &w, &w, 2, -2);
        assert_eq!(pseudo, C::new(0.0, 0.0));
    }

    #[test]
    fn schur_quadrature_matches_closed_form() {
        use rand::Rng;
        let grid = build_grid::<f64>(6).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(67);
        for two_ell in [1, 2, 3] {
            let n = dim(two_ell);
            let rand_vec = |rng: &mut ChaCha8Rng| -> Vec<C> {
                (0..n)
                    .map(|_| C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                    .collect()
            };
            let v = rand_vec(&mut rng);
            let vp = rand_vec(&mut rng);
            let (corr, pseudo) = schur_moment_quadrature(&grid, two_ell, &v, &vp).unwrap();
            for (i, two_i) in labels(two_ell).enumerate() {
                for (j, two_j) in labels(two_ell).enumerate() {
                    let (ec, ep) = schur_moment_closed_form(two_ell, &v, &vp, two_i, two_j);
                    assert!(
                        (corr[(i, j)] - ec).norm() < 1e-10,
                        "corr {two_ell} ({two_i},{two_j})"
                    );
                    assert!(
                        (pseudo[(i, j)] - ep).norm() < 1e-10,
                        "pseudo {two_ell} ({two_i},{two_j})"
                    );
                }
            }
        }
        // Band check: degree 2 needs a grid of band >= 4.
        let small = build_grid::<f64>(3).unwrap();
        let v = basis_vector::<f64>(2, 0);
        assert!(matches!(
            schur_moment_quadrature(&small, 2, &v, &v),
            Err(Error::BandLimitExceeded { .. })
        ));
    }

    #[test]
    fn schur_moments_via_monte_carlo() {
        // Embed x = D(gamma) v as column s = -l and check E{x_i conj(x_j)}
        // against the closed form, including the cross-degree null.
        let v1 = basis_vector::<f64>(2, 0);
        let mut v2 = basis_vector::<f64>(2, 2);
        v2[0] = C::new(0.6, 0.0);
        v2[1] = C::new(0.0, 0.8);
        v2[2] = C::new(0.0, 0.0);
        let gen = |rng: &mut ChaCha8Rng| {
            let out = crate::fields::d_invariantize(
                &[(2, v1.clone()), (2, v2.clone()), (4, basis_vector(4, 0))],
                rng,
            )?;
            let mut c = SpectralCoefficients::<f64>::zeros(4)?;
            // Columns s = -l and s = -l+1 hold the two degree-1 vectors.
            for (i, two_m) in labels(2).enumerate() {
                c.set(2, two_m, -2, out[0].1[i]);
                c.set(2, two_m, 0, out[1].1[i]);
            }
            for (i, two_m) in labels(4).enumerate() {
                c.set(4, two_m, -4, out[2].1[i]);
            }
            Ok(c)
        };
        let mut targets = Vec::new();
        for two_i in labels(2) {
            for two_j in labels(2) {
                let (corr, pseudo) = schur_moment_closed_form(2, &v1, &v2, two_i, two_j);
                targets.push(CorrelationTarget {
                    a: (2, two_i, -2),
                    b: (2, two_j, 0),
                    predicted_corr: corr,
                    predicted_pseudo: pseudo,
                });
            }
        }
        // Cross-degree pair decorrelates.
        targets.push(CorrelationTarget {
            a: (2, 0, -2),
            b: (4, 0, -4),
            predicted_corr: C::new(0.0, 0.0),
            predicted_pseudo: C::new(0.0, 0.0),
        });
        let report = estimate_correlations(gen, 37, 3000, &targets).unwrap();
        for row in &report.rows {
            assert!(
                row.pass(),
                "schur target {:?}/{:?}: est {} pred {}",
                row.target.a,
                row.target.b,
                row.est_corr,
                row.target.predicted_corr
            );
        }
    }
}
