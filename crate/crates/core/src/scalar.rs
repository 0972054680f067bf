//! Integer arithmetic used by the expression evaluator.
//!
//! Program integers are unbounded. Evaluation runs on machine words first and
//! falls back to big integers when a checked operation overflows.

use num_bigint::BigInt;
use num_traits::{CheckedAdd, CheckedMul, CheckedSub, One, ToPrimitive, Zero};
use std::fmt;

/// Integer domain an expression can be evaluated in.
pub trait Scalar:
    Clone + Ord + fmt::Debug + fmt::Display + Zero + One + CheckedAdd + CheckedSub + CheckedMul + ToPrimitive
{
    fn from_i64(v: i64) -> Self;
    fn bit_or(&self, other: &Self) -> Self;
    /// `self << shift`, or `None` if the result does not fit.
    fn shl_checked(&self, shift: u32) -> Option<Self>;
}

impl Scalar for i64 {
    fn from_i64(v: i64) -> Self {
        v
    }

    fn bit_or(&self, other: &Self) -> Self {
        self | other
    }

    fn shl_checked(&self, shift: u32) -> Option<Self> {
        if *self == 0 {
            return Some(0);
        }
        if shift >= 63 {
            return None;
        }
        i64::checked_mul(*self, 1i64 << shift)
    }
}

impl Scalar for BigInt {
    fn from_i64(v: i64) -> Self {
        BigInt::from(v)
    }

    fn bit_or(&self, other: &Self) -> Self {
        self | other
    }

    fn shl_checked(&self, shift: u32) -> Option<Self> {
        Some(self << shift as usize)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn word_shift_detects_overflow() {
        assert_eq!(1i64.shl_checked(3), Some(8));
        assert_eq!((-1i64).shl_checked(2), Some(-4));
        assert_eq!(1i64.shl_checked(62), Some(1 << 62));
        assert_eq!(2i64.shl_checked(62), None);
        assert_eq!(0i64.shl_checked(500), Some(0));
    }

    #[test]
    fn big_shift_is_exact() {
        let v = BigInt::from(3).shl_checked(70).unwrap();
        assert_eq!(v, BigInt::from(3) * BigInt::from(2).pow(70));
        assert_eq!(BigInt::from(5).bit_or(&BigInt::from(2)), BigInt::from(7));
    }
}
