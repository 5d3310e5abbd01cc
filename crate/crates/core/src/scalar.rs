//! Numeric scalar abstraction.
//!
//! Every measure-level algorithm is written once against [`Scalar`] and
//! instantiated with `f64` for sampling-heavy work and with [`Exact`]
//! (arbitrary-precision rationals) when results must be compared with zero
//! tolerance.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Arbitrary-precision rational used for exact computations.
pub type Exact = BigRational;

pub trait Scalar:
    Clone
    + Debug
    + PartialOrd
    + Send
    + Sync
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + 'static
{
    fn ratio(num: i64, den: i64) -> Self;

    /// Converts a float. For [`Exact`] the binary value is taken verbatim.
    fn from_f64(value: f64) -> Self;

    fn to_f64(&self) -> f64;

    fn abs(&self) -> Self;

    /// Absolute slack used by comparisons: `1e-12` for floats, zero for exact.
    fn tolerance() -> Self;

    fn from_usize(n: usize) -> Self {
        Self::ratio(n as i64, 1)
    }

    fn approx_eq(&self, other: &Self) -> bool {
        (self.clone() - other.clone()).abs() <= Self::tolerance()
    }

    fn approx_le(&self, other: &Self) -> bool {
        *self <= other.clone() + Self::tolerance()
    }

    fn max_of(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    fn min_of(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }

    /// Clamps into `[lo, hi]`.
    fn clamp_to(self, lo: Self, hi: Self) -> Self {
        self.max_of(lo).min_of(hi)
    }
}

impl Scalar for f64 {
    fn ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }

    fn from_f64(value: f64) -> Self {
        value
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn abs(&self) -> Self {
        f64::abs(*self)
    }

    fn tolerance() -> Self {
        1e-12
    }
}

impl Scalar for Exact {
    fn ratio(num: i64, den: i64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    fn from_f64(value: f64) -> Self {
        BigRational::from_float(value).expect("finite float")
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn abs(&self) -> Self {
        Signed::abs(self)
    }

    fn tolerance() -> Self {
        BigRational::zero()
    }
}

/// Parses a decimal literal such as `"0.74"` into an exact rational.
pub fn exact_decimal(text: &str) -> Exact {
    let text = text.trim();
    let (negative, digits) = match text.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, text),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    let scale = BigInt::from(10u32).pow(frac_part.len() as u32);
    let numer: BigInt = format!("{int_part}{frac_part}").parse().expect("decimal literal");
    let value = BigRational::new(numer, scale);
    if negative {
        -value
    } else {
        value
    }
}

/// Smallest integer `l` with `l / den >= value` (up to the scalar tolerance).
pub(crate) fn ceil_ratio<T: Scalar>(value: &T, den: i64) -> i64 {
    let mut l = (value.to_f64() * den as f64).ceil() as i64;
    while T::ratio(l - 1, den) >= value.clone() - T::tolerance() {
        l -= 1;
    }
    while T::ratio(l, den) < value.clone() - T::tolerance() {
        l += 1;
    }
    l
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimal_parsing_is_exact() {
        assert_eq!(exact_decimal("0.74"), Exact::ratio(74, 100));
        assert_eq!(exact_decimal("-1.5"), Exact::ratio(-3, 2));
        assert_eq!(exact_decimal("2"), Exact::ratio(2, 1));
    }

    #[test]
    fn ceil_ratio_respects_exact_multiples() {
        assert_eq!(ceil_ratio(&0.6f64, 5), 3);
        assert_eq!(ceil_ratio(&0.74f64, 5), 4);
        assert_eq!(ceil_ratio(&0.25f64, 5), 2);
        assert_eq!(ceil_ratio(&Exact::ratio(3, 5), 5), 3);
        assert_eq!(ceil_ratio(&Exact::ratio(1, 1), 5), 5);
    }
}
