//! Numeric abstraction shared by the inequality metrics.
//!
//! The rate, Gini, Lotka and RPD computations only need field arithmetic and
//! an ordering, so they run unchanged over `f32`, `f64` and exact rationals
//! (`Ratio<i64>`). Anything needing a square root (standard deviation,
//! cosine similarity) asks for [`RealScalar`] instead.

use std::fmt::Debug;

use num_traits::{Float, Num};

/// Ordered field element usable by the metrics module.
pub trait Scalar: Num + Copy + PartialOrd + Debug {
    /// Exact conversion of a small non-negative integer.
    fn from_count(n: u64) -> Self {
        // double-and-add keeps this exact for rationals and integers alike
        let mut acc = Self::zero();
        let mut unit = Self::one();
        let mut rest = n;
        while rest > 0 {
            if rest & 1 == 1 {
                acc = acc + unit;
            }
            unit = unit + unit;
            rest >>= 1;
        }
        acc
    }

    fn is_negative(&self) -> bool {
        *self < Self::zero()
    }

    /// `false` for NaN-like values that do not order against zero.
    fn is_comparable(&self) -> bool {
        self.partial_cmp(&Self::zero()).is_some()
    }

    fn abs_diff(self, other: Self) -> Self {
        if self >= other {
            self - other
        } else {
            other - self
        }
    }
}

impl<T> Scalar for T where T: Num + Copy + PartialOrd + Debug {}

/// Floating-point scalar for the operations that need `sqrt`.
pub trait RealScalar: Scalar + Float {}

impl<T> RealScalar for T where T: Scalar + Float {}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Ratio;

    #[test]
    fn from_count_is_exact() {
        assert_eq!(f64::from_count(0), 0.0);
        assert_eq!(f64::from_count(12), 12.0);
        assert_eq!(Ratio::<i64>::from_count(1023), Ratio::from_integer(1023));
        assert_eq!(f32::from_count(7), 7.0);
    }

    #[test]
    fn nan_is_not_comparable() {
        assert!(!f64::NAN.is_comparable());
        assert!(1.0f64.is_comparable());
        assert!(Ratio::<i64>::new(1, 3).is_comparable());
    }
}
