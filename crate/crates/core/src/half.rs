//! Exact arithmetic on half-integer indices.
//!
//! Degrees and row/column labels live in (1/2)·Z. Storing the *doubled*
//! value as an `i32` keeps every constraint check and multiplier identity
//! exact: degree ell is stored as `two_ell = 2*ell`, a row label m as
//! `two_m = 2*m`, and the admissibility conditions (ell ± m must be whole
//! non-negative integers) become parity and bound checks on integers.

use crate::error::{Error, Result};
use crate::scalar::Real;
use serde::{Deserialize, Serialize};

/// A half-integer stored as its doubled value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct HalfIndex {
    /// Twice the represented value; `doubled = 3` means 3/2.
    pub doubled: i32,
}

impl HalfIndex {
    /// Wrap a doubled value.
    #[inline]
    pub const fn from_doubled(doubled: i32) -> Self {
        HalfIndex { doubled }
    }

    /// True when the represented value is a whole integer.
    #[inline]
    pub const fn is_integer(self) -> bool {
        self.doubled % 2 == 0
    }

    /// The represented value as a scalar (`doubled / 2`).
    #[inline]
    pub fn as_scalar<T: Real>(self) -> T {
        T::from_doubled(self.doubled)
    }
}

impl std::fmt::Display for HalfIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.doubled % 2 == 0 {
            write!(f, "{}", self.doubled / 2)
        } else {
            write!(f, "{}/2", self.doubled)
        }
    }
}

/// Validate a degree: non-negative doubled value.
#[inline]
pub fn check_degree(two_ell: i32) -> Result<()> {
    if two_ell < 0 {
        return Err(Error::InvalidIndex {
            two_ell,
            two_m: 0,
            two_s: 0,
        });
    }
    Ok(())
}

/// Validate an index pair (m, s) against a degree: both must satisfy
/// |x| <= ell with ell - x a whole integer (same parity as the degree).
#[inline]
pub fn check_indices(two_ell: i32, two_m: i32, two_s: i32) -> Result<()> {
    check_degree(two_ell)?;
    let ok = |x: i32| x.abs() <= two_ell && (two_ell - x) % 2 == 0;
    if ok(two_m) && ok(two_s) {
        Ok(())
    } else {
        Err(Error::InvalidIndex {
            two_ell,
            two_m,
            two_s,
        })
    }
}

/// Matrix dimension for a degree: `two_ell + 1` admissible labels.
#[inline]
pub fn dim(two_ell: i32) -> usize {
    debug_assert!(two_ell >= 0);
    (two_ell + 1) as usize
}

/// Row/column position of a doubled label within the ascending layout
/// (-ell, -ell+1, ..., ell): `(two_m + two_ell) / 2`.
#[inline]
pub fn offset(two_ell: i32, two_m: i32) -> usize {
    debug_assert!(check_indices(two_ell, two_m, two_m).is_ok());
    ((two_m + two_ell) / 2) as usize
}

/// Doubled label at a given ascending position.
#[inline]
pub fn label_at(two_ell: i32, index: usize) -> i32 {
    -two_ell + 2 * index as i32
}

/// Iterator over the admissible doubled labels of a degree, ascending.
pub fn labels(two_ell: i32) -> impl Iterator<Item = i32> + Clone {
    (0..dim(two_ell)).map(move |i| label_at(two_ell, i))
}
