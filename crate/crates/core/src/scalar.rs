//! Scalar abstraction and compensated (double-double) arithmetic.
//!
//! # Generic scalar type
//!
//! All floating-point code in this crate is generic over [`Real`], a small
//! umbrella trait over the `num-traits` hierarchy implemented for `f32` and
//! `f64`. Index bookkeeping is exact integer arithmetic on doubled indices
//! (see [`crate::half`]) and never touches the scalar type. The documented
//! tolerances hold for the `f64` instantiation, which the crate-root aliases
//! expose as the default.
//!
//! # Compensated arithmetic
//!
//! The closed-form matrix-coefficient evaluator is an alternating sum whose
//! terms can exceed the result by ~9 orders of magnitude near the band-limit
//! cap (degree 32: the largest term is ≈ binom(32,16)^2 · 2^-32 ≈ 8e7 while
//! entries are O(1)). Plain f64 accumulation would lose ~9 digits there and
//! break the 1e-10 unitarity contract, so the inner sums run in double-double
//! arithmetic ([`Dd`]): an unevaluated hi + lo pair carrying ~2x the mantissa
//! bits, built from the classic TwoSum / TwoProd error-free transformations
//! (TwoProd via fused multiply-add). Coefficients enter exactly (binomial
//! products fit in 64 bits up to the cap), so entry values are accurate to a
//! few ulps of the *result* regardless of internal cancellation.

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Floating-point scalar usable throughout the crate.
///
/// Implemented for `f32` and `f64`. The bound set is the `num-traits` Float
/// stack plus conversions and the thread-safety markers required by the
/// parallel estimators.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + std::fmt::Debug
    + std::fmt::Display
    + Send
    + Sync
    + 'static
{
    /// Lossless widening used when ingesting integer quantities (weights,
    /// binomial coefficients below the mantissa width, doubled indices).
    fn from_i32_exact(v: i32) -> Self {
        Self::from_i32(v).expect("i32 is representable in any Real")
    }

    /// `v / 2` as a scalar; doubled indices are halved this way when a true
    /// half-integer value is needed (phases, multipliers).
    fn from_doubled(v: i32) -> Self {
        Self::from_i32_exact(v) / (Self::one() + Self::one())
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Error-free sum: returns `(s, e)` with `s = fl(a + b)` and `a + b = s + e`.
#[inline]
fn two_sum<T: Real>(a: T, b: T) -> (T, T) {
    let s = a + b;
    let bb = s - a;
    let e = (a - (s - bb)) + (b - bb);
    (s, e)
}

/// Error-free sum for `|a| >= |b|`.
#[inline]
fn quick_two_sum<T: Real>(a: T, b: T) -> (T, T) {
    let s = a + b;
    let e = b - (s - a);
    (s, e)
}

/// Error-free product via fused multiply-add: `a * b = p + e`.
#[inline]
fn two_prod<T: Real>(a: T, b: T) -> (T, T) {
    let p = a * b;
    let e = a.mul_add(b, -p);
    (p, e)
}

/// A double-double value: the unevaluated sum `hi + lo` with `|lo| <= ulp(hi)/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dd<T> {
    pub hi: T,
    pub lo: T,
}

impl<T: Real> Dd<T> {
    /// Zero.
    #[inline]
    pub fn zero() -> Self {
        Dd {
            hi: T::zero(),
            lo: T::zero(),
        }
    }

    /// Lift a scalar exactly.
    #[inline]
    pub fn from_scalar(x: T) -> Self {
        Dd { hi: x, lo: T::zero() }
    }

    /// Lift a `u64` exactly (the hi part takes the rounded value; the integer
    /// remainder, at most 2^11 for inputs below 2^64, lands in lo exactly).
    pub fn from_u64(x: u64) -> Self {
        let hi = T::from_u64(x).expect("u64 fits the scalar's range");
        let hi_int = hi
            .to_i128()
            .expect("rounded integer magnitude fits i128");
        let lo = T::from_i128(x as i128 - hi_int).expect("residual is tiny");
        Dd { hi, lo }.renorm()
    }

    /// Lift a `u128` exactly by splitting into 64-bit halves.
    pub fn from_u128(x: u128) -> Self {
        let hi64 = (x >> 64) as u64;
        let lo64 = x as u64;
        if hi64 == 0 {
            return Self::from_u64(lo64);
        }
        let scale = T::from_f64(18446744073709551616.0).expect("2^64 is representable"); // 2^64
        Self::from_u64(hi64).mul_scalar(scale) + Self::from_u64(lo64)
    }

    /// Renormalize so the parts are non-overlapping.
    #[inline]
    fn renorm(self) -> Self {
        let (hi, lo) = quick_two_sum(self.hi, self.lo);
        Dd { hi, lo }
    }

    /// Multiply by a plain scalar.
    #[inline]
    pub fn mul_scalar(self, s: T) -> Self {
        let (p1, p2) = two_prod(self.hi, s);
        let p2 = p2 + self.lo * s;
        let (hi, lo) = quick_two_sum(p1, p2);
        Dd { hi, lo }
    }

    /// Square root (one Newton correction on the scalar estimate).
    pub fn sqrt(self) -> Self {
        if self.hi <= T::zero() {
            return Dd::zero();
        }
        let r = self.hi.sqrt();
        let rd = Dd::from_scalar(r);
        let err = self - rd * rd;
        let corr = err.hi / (r + r);
        let (hi, lo) = quick_two_sum(r, corr);
        Dd { hi, lo }
    }

    /// Collapse to the nearest scalar.
    #[inline]
    pub fn to_scalar(self) -> T {
        self.hi + self.lo
    }
}

impl<T: Real> std::ops::Add for Dd<T> {
    type Output = Self;

    /// Accurate double-double addition.
    #[inline]
    fn add(self, other: Self) -> Self {
        let (s1, s2) = two_sum(self.hi, other.hi);
        let (t1, t2) = two_sum(self.lo, other.lo);
        let (s1, s2) = quick_two_sum(s1, s2 + t1);
        let (s1, s2) = quick_two_sum(s1, s2 + t2);
        Dd { hi: s1, lo: s2 }
    }
}

impl<T: Real> std::ops::Neg for Dd<T> {
    type Output = Self;

    #[inline]
    fn neg(self) -> Self {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl<T: Real> std::ops::Sub for Dd<T> {
    type Output = Self;

    #[inline]
    fn sub(self, other: Self) -> Self {
        self + (-other)
    }
}

impl<T: Real> std::ops::Mul for Dd<T> {
    type Output = Self;

    /// Double-double multiplication.
    #[inline]
    fn mul(self, other: Self) -> Self {
        let (p1, p2) = two_prod(self.hi, other.hi);
        let p2 = p2 + self.hi * other.lo + self.lo * other.hi;
        let (hi, lo) = quick_two_sum(p1, p2);
        Dd { hi, lo }
    }
}

impl<T: Real> std::ops::Div for Dd<T> {
    type Output = Self;

    /// Double-double division (two Newton correction steps).
    fn div(self, other: Self) -> Self {
        let q1 = self.hi / other.hi;
        let r = self - other.mul_scalar(q1);
        let q2 = r.hi / other.hi;
        let r = r - other.mul_scalar(q2);
        let q3 = r.hi / other.hi;
        Dd::from_scalar(q1) + Dd::from_scalar(q2) + Dd::from_scalar(q3)
    }
}

/// Exact binomial coefficients `C(n, k)` for `n <= 68`, computed in 128-bit
/// integer arithmetic (Pascal's rule; every value involved at the supported
/// band limit fits comfortably).
#[derive(Debug, Clone)]
pub struct BinomialTable {
    n_max: usize,
    rows: Vec<Vec<u128>>,
}

impl BinomialTable {
    /// Build the table up to `n_max` inclusive.
    pub fn new(n_max: usize) -> Self {
        let mut rows: Vec<Vec<u128>> = Vec::with_capacity(n_max + 1);
        for n in 0..=n_max {
            let mut row = vec![1u128; n + 1];
            for k in 1..n {
                row[k] = rows[n - 1][k - 1] + rows[n - 1][k];
            }
            rows.push(row);
        }
        BinomialTable { n_max, rows }
    }

    /// `C(n, k)`; zero outside `0 <= k <= n`.
    #[inline]
    pub fn get(&self, n: i32, k: i32) -> u128 {
        if n < 0 || k < 0 || k > n {
            return 0;
        }
        let n = n as usize;
        debug_assert!(n <= self.n_max, "binomial table too small");
        self.rows[n][k as usize]
    }
}
