//! Outward-rounded interval arithmetic on f64, sized for the certifier:
//! scalars, 3-vectors, 3×3 matrices, real powers, and the ℓ∞ operator norm.
//!
//! Rounding model: every arithmetic operation is computed in
//! round-to-nearest and the result endpoints are then stepped outward by one
//! ulp (`next_down`/`next_up`), which dominates the at most half-ulp nearest
//! rounding error. Transcendentals (`pow`, `exp`, `ln`) additionally inflate
//! by a relative 2⁻⁵⁰ before the ulp step, covering the few-ulp worst case of
//! the underlying libm routines with a wide margin. Per endpoint and
//! operation the total widening stays at or below 4 ulp for the basic
//! operations.

use core::fmt;
use core::ops::{Add, Div, Mul, Neg, Sub};

use crate::scalar::Scalar;

/// Relative slack applied around transcendental results (2⁻⁵⁰ ≈ 8.9e-16,
/// i.e. four ulps), conservative for faithfully rounded libm routines.
const TRANS_REL_SLACK: f64 = 8.881_784_197_001_252e-16;

/// Spurious negative lower bounds beyond this magnitude are treated as a
/// caller bug in [`Scalar::powr`] for intervals; below it they are rounding
/// spill from outward arithmetic on provably nonnegative quantities.
const NEG_GUARD: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IntervalError {
    /// lo > hi, or a non-finite endpoint.
    InvalidBounds,
    /// Division by an interval containing zero.
    DivisionByZero,
    /// Power of an interval with negative lower bound.
    NegativeBase,
    /// Power with a (partially) negative exponent interval.
    NegativeExponent,
    /// Logarithm of an interval not strictly positive.
    NonPositiveLog,
}

impl fmt::Display for IntervalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let msg = match self {
            IntervalError::InvalidBounds => "interval bounds must be finite with lo <= hi",
            IntervalError::DivisionByZero => "division by an interval containing zero",
            IntervalError::NegativeBase => "power base interval extends below zero",
            IntervalError::NegativeExponent => "power exponent interval extends below zero",
            IntervalError::NonPositiveLog => "logarithm of a non-positive interval",
        };
        write!(f, "{msg}")
    }
}

impl core::error::Error for IntervalError {}

/// A closed interval [lo, hi] with finite endpoints. Every operation returns
/// an enclosure of the exact real-arithmetic image.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    lo: f64,
    hi: f64,
}

pub type IntervalVector3 = [Interval; 3];
pub type IntervalMatrix3 = [[Interval; 3]; 3];

fn outward(lo: f64, hi: f64) -> Interval {
    Interval {
        lo: lo.next_down(),
        hi: hi.next_up(),
    }
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self, IntervalError> {
        if lo.is_finite() && hi.is_finite() && lo <= hi {
            Ok(Self { lo, hi })
        } else {
            Err(IntervalError::InvalidBounds)
        }
    }

    /// The degenerate interval [v, v].
    pub fn point(v: f64) -> Self {
        debug_assert!(v.is_finite());
        Self { lo: v, hi: v }
    }

    /// [c − r, c + r], outward rounded.
    pub fn centered(c: f64, r: f64) -> Self {
        debug_assert!(r >= 0.0);
        outward(c - r, c + r)
    }

    #[inline]
    pub fn lo(self) -> f64 {
        self.lo
    }

    #[inline]
    pub fn hi(self) -> f64 {
        self.hi
    }

    pub fn width(self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn is_subset_of(self, other: Self) -> bool {
        other.lo <= self.lo && self.hi <= other.hi
    }

    /// Enclosure of |x| over the interval (exact, no widening needed).
    pub fn abs_val(self) -> Self {
        if self.lo >= 0.0 {
            self
        } else if self.hi <= 0.0 {
            Self {
                lo: -self.hi,
                hi: -self.lo,
            }
        } else {
            Self {
                lo: 0.0,
                hi: self.hi.max(-self.lo),
            }
        }
    }

    /// Enclosure of max(x, y) over the operands (exact).
    pub fn max_val(self, other: Self) -> Self {
        Self {
            lo: self.lo.max(other.lo),
            hi: self.hi.max(other.hi),
        }
    }

    pub fn checked_div(self, rhs: Self) -> Result<Self, IntervalError> {
        if rhs.lo <= 0.0 && rhs.hi >= 0.0 {
            return Err(IntervalError::DivisionByZero);
        }
        let c = [
            self.lo / rhs.lo,
            self.lo / rhs.hi,
            self.hi / rhs.lo,
            self.hi / rhs.hi,
        ];
        let mut lo = c[0];
        let mut hi = c[0];
        for v in &c[1..] {
            lo = lo.min(*v);
            hi = hi.max(*v);
        }
        Ok(outward(lo, hi))
    }

    fn pow_corner(base: f64, e: f64) -> (f64, f64) {
        // 0^0 = 1 by convention (covers t^(p−1) at p = 1); 0^e = 0 for e > 0
        if base == 0.0 {
            return if e == 0.0 { (1.0, 1.0) } else { (0.0, 0.0) };
        }
        let v = libm::pow(base, e);
        let slack = v.abs() * TRANS_REL_SLACK;
        ((v - slack).next_down(), (v + slack).next_up())
    }

    /// Enclosure of { b^e : b ∈ self, e ∈ exponent } for a nonnegative base
    /// interval and a nonnegative exponent interval. Monotone in the base;
    /// monotonicity in the exponent flips at b = 1, so corner evaluation
    /// covers the extrema.
    pub fn pow(self, exponent: Self) -> Result<Self, IntervalError> {
        if self.lo < 0.0 {
            return Err(IntervalError::NegativeBase);
        }
        if exponent.lo < 0.0 {
            return Err(IntervalError::NegativeExponent);
        }
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for b in [self.lo, self.hi] {
            for e in [exponent.lo, exponent.hi] {
                let (clo, chi) = Self::pow_corner(b, e);
                lo = lo.min(clo);
                hi = hi.max(chi);
            }
        }
        // a base spanning 1 attains b^e = 1 inside the box
        if self.lo < 1.0 && self.hi > 1.0 {
            lo = lo.min(1.0);
            hi = hi.max(1.0);
        }
        Interval::new(lo, hi)
    }

    /// Enclosure of eˣ.
    pub fn exp(self) -> Self {
        let lo = libm::exp(self.lo);
        let hi = libm::exp(self.hi);
        outward(
            lo - lo.abs() * TRANS_REL_SLACK,
            hi + hi.abs() * TRANS_REL_SLACK,
        )
    }

    /// Enclosure of ln x for a strictly positive interval.
    pub fn ln(self) -> Result<Self, IntervalError> {
        if self.lo <= 0.0 {
            return Err(IntervalError::NonPositiveLog);
        }
        let lo = libm::log(self.lo);
        let hi = libm::log(self.hi);
        Ok(outward(
            lo - lo.abs() * TRANS_REL_SLACK,
            hi + hi.abs() * TRANS_REL_SLACK,
        ))
    }
}

impl fmt::Display for Interval {
    /// Prints as `[lo,hi]` with 17 significant digits.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:.16e},{:.16e}]", self.lo, self.hi)
    }
}

impl Add for Interval {
    type Output = Interval;

    fn add(self, rhs: Self) -> Self {
        outward(self.lo + rhs.lo, self.hi + rhs.hi)
    }
}

impl Sub for Interval {
    type Output = Interval;

    fn sub(self, rhs: Self) -> Self {
        outward(self.lo - rhs.hi, self.hi - rhs.lo)
    }
}

impl Neg for Interval {
    type Output = Interval;

    fn neg(self) -> Self {
        // exact
        Interval {
            lo: -self.hi,
            hi: -self.lo,
        }
    }
}

impl Mul for Interval {
    type Output = Interval;

    fn mul(self, rhs: Self) -> Self {
        let c = [
            self.lo * rhs.lo,
            self.lo * rhs.hi,
            self.hi * rhs.lo,
            self.hi * rhs.hi,
        ];
        let mut lo = c[0];
        let mut hi = c[0];
        for v in &c[1..] {
            lo = lo.min(*v);
            hi = hi.max(*v);
        }
        outward(lo, hi)
    }
}

impl Div for Interval {
    type Output = Interval;

    /// Panics when the divisor contains zero; use [`Interval::checked_div`]
    /// for a fallible version.
    fn div(self, rhs: Self) -> Self {
        self.checked_div(rhs)
            .expect("division by an interval containing zero")
    }
}

impl Scalar for Interval {
    fn of(v: f64) -> Self {
        Interval::point(v)
    }

    /// Total power for region-guarded formula evaluation. A lower bound
    /// (of the base, or of the exponent, e.g. p − 1 at p = 1) that is
    /// negative by at most [`NEG_GUARD`] is rounding spill from outward
    /// arithmetic on a provably nonnegative quantity and is clamped to zero;
    /// anything more negative is a caller bug.
    fn powr(self, e: Self) -> Self {
        let clamp = |iv: Interval, what: &str| {
            if iv.lo < 0.0 {
                assert!(
                    iv.lo >= -NEG_GUARD && iv.hi >= 0.0,
                    "interval power with genuinely negative {what}: {iv}"
                );
                Interval { lo: 0.0, hi: iv.hi }
            } else {
                iv
            }
        };
        let base = clamp(self, "base");
        let e = clamp(e, "exponent");
        base.pow(e).expect("base and exponent checked nonnegative")
    }
}

/// Interval matrix product.
pub fn mat_mul(a: &IntervalMatrix3, b: &IntervalMatrix3) -> IntervalMatrix3 {
    let mut out = [[Interval::point(0.0); 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j] + a[i][2] * b[2][j];
        }
    }
    out
}

/// Embeds a point matrix entrywise.
pub fn mat_from_points(m: &[[f64; 3]; 3]) -> IntervalMatrix3 {
    let mut out = [[Interval::point(0.0); 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = Interval::point(m[i][j]);
        }
    }
    out
}

/// Enclosure of the ℓ∞ operator norm: max over rows of the ℓ¹ row norm.
pub fn linf_op_norm(m: &IntervalMatrix3) -> Interval {
    let mut best = Interval::point(0.0);
    for row in m {
        let sum = row[0].abs_val() + row[1].abs_val() + row[2].abs_val();
        best = best.max_val(sum);
    }
    best
}

/// Enclosure of the ℓ∞ vector norm max |vᵢ|.
pub fn vec_linf(v: &IntervalVector3) -> Interval {
    v[0].abs_val()
        .max_val(v[1].abs_val())
        .max_val(v[2].abs_val())
}
