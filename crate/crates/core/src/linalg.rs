//! Minimal dense complex linear algebra.
//!
//! Every matrix in this crate is small (dimension at most the band-limit cap
//! plus one, i.e. 65), so a self-contained row-major matrix type plus a
//! cyclic complex-Hermitian Jacobi eigensolver covers all needs: unitarity
//! and homomorphism defects, positive-semidefinite validation and square
//! roots of covariance matrices, and singular values (via the Gram matrix)
//! for span/rank checks. Keeping this in-crate lets the scalar type stay
//! generic over the `num-traits` stack without pulling a second trait
//! hierarchy from an external linear-algebra crate.

use crate::scalar::Real;
use num_complex::Complex;

/// Dense row-major complex matrix.
///
/// # Invariants
/// - `data.len() == rows * cols`
/// - entry `(r, c)` lives at linear index `r * cols + c`
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix<T> {
    data: Vec<Complex<T>>,
    rows: usize,
    cols: usize,
}

impl<T: Real> CMatrix<T> {
    /// Zero matrix.
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMatrix {
            data: vec![Complex::new(T::zero(), T::zero()); rows * cols],
            rows,
            cols,
        }
    }

    /// Identity matrix.
    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex::new(T::one(), T::zero());
        }
        m
    }

    /// Build from a function of (row, column).
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex<T>) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        CMatrix { data, rows, cols }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Raw row-major storage.
    pub fn as_slice(&self) -> &[Complex<T>] {
        &self.data
    }

    /// Mutable raw row-major storage.
    pub fn as_mut_slice(&mut self) -> &mut [Complex<T>] {
        &mut self.data
    }

    /// Matrix product `self * other`.
    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "dimension mismatch in mul");
        let mut out = Self::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(r, k)];
                if a.re == T::zero() && a.im == T::zero() {
                    continue;
                }
                for c in 0..other.cols {
                    out[(r, c)] += a * other[(k, c)];
                }
            }
        }
        out
    }

    /// Matrix-vector product.
    pub fn mul_vec(&self, v: &[Complex<T>]) -> Vec<Complex<T>> {
        assert_eq!(self.cols, v.len(), "dimension mismatch in mul_vec");
        (0..self.rows)
            .map(|r| {
                let mut acc = Complex::new(T::zero(), T::zero());
                for c in 0..self.cols {
                    acc += self[(r, c)] * v[c];
                }
                acc
            })
            .collect()
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)].conj())
    }

    /// Transpose (no conjugation).
    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)])
    }

    /// Entrywise conjugate.
    pub fn conj(&self) -> Self {
        Self::from_fn(self.rows, self.cols, |r, c| self[(r, c)].conj())
    }

    /// Entrywise difference.
    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self::from_fn(self.rows, self.cols, |r, c| self[(r, c)] - other[(r, c)])
    }

    /// Largest entry magnitude (sup norm); the standard defect metric here.
    pub fn max_abs(&self) -> T {
        self.data
            .iter()
            .map(|z| z.norm())
            .fold(T::zero(), |a, b| if b > a { b } else { a })
    }

    /// Frobenius norm.
    pub fn frobenius(&self) -> T {
        self.data
            .iter()
            .map(|z| z.norm_sqr())
            .fold(T::zero(), |a, b| a + b)
            .sqrt()
    }

    /// Sup-norm distance from the identity of `self * self^H`.
    pub fn unitarity_defect(&self) -> T {
        self.mul(&self.adjoint())
            .sub(&Self::identity(self.rows))
            .max_abs()
    }

    /// Sup-norm of the anti-Hermitian part, `max |A - A^H|`.
    pub fn hermiticity_defect(&self) -> T {
        self.sub(&self.adjoint()).max_abs()
    }

    /// Real trace (imaginary parts discarded; meaningful for Hermitian input).
    pub fn trace_re(&self) -> T {
        let mut t = T::zero();
        for i in 0..self.rows.min(self.cols) {
            t += self[(i, i)].re;
        }
        t
    }

    /// Determinant via LU with partial pivoting (square matrices only).
    pub fn det(&self) -> Complex<T> {
        assert_eq!(self.rows, self.cols, "det needs a square matrix");
        let n = self.rows;
        let mut lu = self.clone();
        let mut det = Complex::new(T::one(), T::zero());
        for k in 0..n {
            let mut pivot = k;
            let mut best = lu[(k, k)].norm_sqr();
            for r in (k + 1)..n {
                let cand = lu[(r, k)].norm_sqr();
                if cand > best {
                    best = cand;
                    pivot = r;
                }
            }
            if best == T::zero() {
                return Complex::new(T::zero(), T::zero());
            }
            if pivot != k {
                for c in 0..n {
                    let tmp = lu[(k, c)];
                    lu[(k, c)] = lu[(pivot, c)];
                    lu[(pivot, c)] = tmp;
                }
                det = -det;
            }
            let d = lu[(k, k)];
            det *= d;
            for r in (k + 1)..n {
                let factor = lu[(r, k)] / d;
                for c in (k + 1)..n {
                    let sub = factor * lu[(k, c)];
                    lu[(r, c)] -= sub;
                }
            }
        }
        det
    }
}

impl<T> std::ops::Index<(usize, usize)> for CMatrix<T> {
    type Output = Complex<T>;
    #[inline]
    fn index(&self, (r, c): (usize, usize)) -> &Complex<T> {
        debug_assert!(r < self.rows && c < self.cols);
        &self.data[r * self.cols + c]
    }
}

impl<T> std::ops::IndexMut<(usize, usize)> for CMatrix<T> {
    #[inline]
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Complex<T> {
        debug_assert!(r < self.rows && c < self.cols);
        &mut self.data[r * self.cols + c]
    }
}

/// Eigendecomposition of a Hermitian matrix by cyclic complex Jacobi sweeps.
///
/// Returns `(eigenvalues, vectors)` with eigenvalues ascending and the k-th
/// column of `vectors` the corresponding orthonormal eigenvector, so that
/// `A = V diag(w) V^H`. Quadratic convergence makes ~8 sweeps ample at the
/// dimensions used here; the iteration stops once every off-diagonal entry
/// is below machine precision relative to the Frobenius norm.
pub fn eigh<T: Real>(a: &CMatrix<T>) -> (Vec<T>, CMatrix<T>) {
    assert_eq!(a.rows(), a.cols(), "eigh needs a square matrix");
    let n = a.rows();
    let mut h = a.clone();
    let mut v = CMatrix::<T>::identity(n);
    if n <= 1 {
        return ((0..n).map(|i| h[(i, i)].re).collect(), v);
    }
    let scale = a.frobenius();
    let tol = T::epsilon() * if scale > T::zero() { scale } else { T::one() };
    let max_sweeps = 60;
    for _sweep in 0..max_sweeps {
        let mut off = T::zero();
        for p in 0..n {
            for q in (p + 1)..n {
                off += h[(p, q)].norm_sqr();
            }
        }
        if off.sqrt() <= tol {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let z = h[(p, q)];
                let r = z.norm();
                if r <= tol * T::from_f64(1e-3).unwrap() {
                    continue;
                }
                // Factor the phase out of the pivot (z = r e^{i theta}) and
                // solve the remaining real 2x2 rotation: with
                // tau = (h_qq - h_pp) / (2r), the small-magnitude root of
                // r t^2 + (h_pp - h_qq) t - r = 0 is
                // t = -sign(tau) / (|tau| + sqrt(1 + tau^2)).
                let phase = z / Complex::new(r, T::zero()); // e^{i theta}
                let a_pp = h[(p, p)].re;
                let a_qq = h[(q, q)].re;
                let tau = (a_qq - a_pp) / (r + r);
                let sign = if tau < T::zero() { -T::one() } else { T::one() };
                let t = -sign / (tau.abs() + (T::one() + tau * tau).sqrt());
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = t * c;
                // J = I except the (p,q) block [[c, -s], [s e^{-i th}, c e^{-i th}]];
                // apply A <- J^H A J and accumulate V <- V J.
                let e_m = phase.conj(); // e^{-i theta}
                let e_p = phase; // e^{+i theta}
                // Column update: A <- A J
                for row in 0..n {
                    let ap = h[(row, p)];
                    let aq = h[(row, q)];
                    h[(row, p)] = ap * c + aq * (e_m * s);
                    h[(row, q)] = ap * (-s) + aq * (e_m * c);
                }
                // Row update: A <- J^H A
                for col in 0..n {
                    let ap = h[(p, col)];
                    let aq = h[(q, col)];
                    h[(p, col)] = ap * c + aq * (e_p * s);
                    h[(q, col)] = ap * (-s) + aq * (e_p * c);
                }
                // Vector accumulation: V <- V J
                for row in 0..n {
                    let vp = v[(row, p)];
                    let vq = v[(row, q)];
                    v[(row, p)] = vp * c + vq * (e_m * s);
                    v[(row, q)] = vp * (-s) + vq * (e_m * c);
                }
                // Re-symmetrize the pivot pair against rounding drift.
                let sym = (h[(p, q)] + h[(q, p)].conj()) * T::from_f64(0.5).unwrap();
                h[(p, q)] = sym;
                h[(q, p)] = sym.conj();
            }
        }
    }
    // Sort ascending by eigenvalue, permuting columns of V alongside.
    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<T> = (0..n).map(|i| h[(i, i)].re).collect();
    order.sort_by(|&i, &j| diag[i].partial_cmp(&diag[j]).unwrap());
    let vals: Vec<T> = order.iter().map(|&i| diag[i]).collect();
    let vecs = CMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    (vals, vecs)
}

/// Singular values of an arbitrary matrix, ascending, via the eigenvalues of
/// the Gram matrix `A^H A` (adequate at these dimensions; values below
/// machine noise are clamped to zero).
pub fn singular_values<T: Real>(a: &CMatrix<T>) -> Vec<T> {
    let gram = a.adjoint().mul(a);
    let (vals, _) = eigh(&gram);
    vals.into_iter()
        .map(|v| if v > T::zero() { v.sqrt() } else { T::zero() })
        .collect()
}

/// Hermitian positive-semidefinite square root: clamp negative eigenvalues
/// (tolerated rounding noise) at zero and rebuild `V diag(sqrt(w)) V^H`.
pub fn psd_sqrt<T: Real>(a: &CMatrix<T>) -> CMatrix<T> {
    let n = a.rows();
    let (vals, vecs) = eigh(a);
    let mut scaled = vecs.clone();
    for (c, &w) in vals.iter().enumerate() {
        let s = if w > T::zero() { w.sqrt() } else { T::zero() };
        for r in 0..n {
            scaled[(r, c)] *= s;
        }
    }
    scaled.mul(&vecs.adjoint())
}
