//! Scalar abstraction shared by plain `f64` evaluation and interval
//! evaluation, so that the family system and its Jacobian are written once
//! and both paths use identical formulas.

use core::ops::{Add, Mul, Neg, Sub};

/// A real-like scalar: `f64`, or an outward-rounded interval.
pub trait Scalar:
    Copy + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Neg<Output = Self>
{
    /// Embeds a constant.
    fn of(v: f64) -> Self;

    /// Real power `self^e`. Callers must keep the base nonnegative; the
    /// convention `0^0 = 1` applies (so `t^(p-1)` is 1 at `p = 1` for all
    /// `t >= 0`).
    fn powr(self, e: Self) -> Self;
}

impl Scalar for f64 {
    fn of(v: f64) -> Self {
        v
    }

    fn powr(self, e: Self) -> Self {
        libm::pow(self, e)
    }
}
