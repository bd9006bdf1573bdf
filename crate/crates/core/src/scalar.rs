//! Field abstraction shared by the exact and the binary64 backends.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num::{BigInt, BigRational, One, Signed, ToPrimitive, Zero};

/// Arbitrary-precision rational. Always normalized: positive denominator,
/// coprime numerator and denominator.
pub type Rat = BigRational;

/// The arithmetic the pipeline needs from its scalar field.
///
/// Implemented for [`Rat`] (the default, exact) and `f64` (opt-in).
pub trait Scalar:
    Clone
    + Debug
    + PartialEq
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn zero() -> Self;
    fn one() -> Self;
    fn from_i64(v: i64) -> Self;
    fn from_rat(r: &Rat) -> Self;
    fn is_zero(&self) -> bool;
    fn to_f64(&self) -> f64;

    /// Natural logarithm of the absolute value; `-inf` at zero. Finite for
    /// values far outside the binary64 range.
    fn ln_abs(&self) -> f64;

    /// Preference weight when choosing an elimination pivot. Any nonzero
    /// weight is acceptable; larger is preferred.
    fn pivot_weight(&self) -> f64;

    /// True when the backend is exact, so that equality checks are bitwise.
    const EXACT: bool;

    fn from_u64(v: u64) -> Self {
        Self::from_i64(v as i64)
    }

    fn pow(&self, exp: i64) -> Self {
        let mut acc = Self::one();
        for _ in 0..exp.unsigned_abs() {
            acc = acc * self.clone();
        }
        if exp < 0 {
            Self::one() / acc
        } else {
            acc
        }
    }

    /// Equality up to relative tolerance `rel` for the float backend,
    /// exact equality otherwise.
    fn approx_eq(&self, other: &Self, rel: f64) -> bool {
        if Self::EXACT {
            return self == other;
        }
        let (a, b) = (self.to_f64(), other.to_f64());
        let scale = a.abs().max(b.abs()).max(f64::MIN_POSITIVE);
        (a - b).abs() <= rel * scale
    }
}

impl Scalar for Rat {
    const EXACT: bool = true;

    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn from_i64(v: i64) -> Self {
        Rat::from_integer(BigInt::from(v))
    }
    fn from_rat(r: &Rat) -> Self {
        r.clone()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn to_f64(&self) -> f64 {
        rat_to_f64(self)
    }
    fn ln_abs(&self) -> f64 {
        if Zero::is_zero(self) {
            return f64::NEG_INFINITY;
        }
        ln_bigint(self.numer()) - ln_bigint(self.denom())
    }
    fn pivot_weight(&self) -> f64 {
        if Zero::is_zero(self) {
            0.0
        } else {
            // Prefer short representations to limit coefficient growth.
            let bits = self.numer().bits() + self.denom().bits();
            1.0 / (1.0 + bits as f64)
        }
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_i64(v: i64) -> Self {
        v as f64
    }
    fn from_rat(r: &Rat) -> Self {
        rat_to_f64(r)
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn ln_abs(&self) -> f64 {
        self.abs().ln()
    }
    fn pivot_weight(&self) -> f64 {
        self.abs()
    }
}

/// Converts a rational to the nearest-ish binary64 without overflowing on
/// huge numerators and denominators.
pub fn rat_to_f64(r: &Rat) -> f64 {
    if Zero::is_zero(r) {
        return 0.0;
    }
    if let (Some(n), Some(d)) = (r.numer().to_f64(), r.denom().to_f64()) {
        if n.is_finite() && d.is_finite() && d != 0.0 {
            return n / d;
        }
    }
    // Shift both sides down to 64 significant bits before dividing.
    let nb = r.numer().bits() as i64;
    let db = r.denom().bits() as i64;
    let ns = (nb - 64).max(0);
    let ds = (db - 64).max(0);
    let n = (r.numer().abs() >> ns as usize).to_f64().unwrap_or(f64::NAN);
    let d = (r.denom() >> ds as usize).to_f64().unwrap_or(f64::NAN);
    let mag = n / d * 2f64.powi((ns - ds) as i32);
    if r.is_negative() {
        -mag
    } else {
        mag
    }
}

fn ln_bigint(v: &BigInt) -> f64 {
    let shift = v.bits().saturating_sub(64);
    let top = (v.abs() >> shift as usize).to_f64().unwrap_or(f64::NAN);
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

/// `n!` in the requested field.
pub fn factorial<T: Scalar>(n: u64) -> T {
    (2..=n).fold(T::one(), |acc, v| acc * T::from_u64(v))
}

/// Parses `"num/den"` or an integer literal.
pub fn parse_rat(s: &str) -> Option<Rat> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().ok()?;
            let d: BigInt = d.trim().parse().ok()?;
            if Zero::is_zero(&d) {
                return None;
            }
            Some(Rat::new(n, d))
        }
        None => s.parse::<BigInt>().ok().map(Rat::from_integer),
    }
}

/// Formats as `"num/den"`, or just `"num"` for integers.
pub fn format_rat(r: &Rat) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Shorthand for a small rational `n/d` (used heavily in tests).
pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_roundtrip_through_text() {
        let r = rat(-6, 4);
        assert_eq!(format_rat(&r), "-3/2");
        assert_eq!(parse_rat("-3/2"), Some(r));
        assert_eq!(parse_rat("7"), Some(rat(7, 1)));
        assert_eq!(parse_rat("1/0"), None);
    }

    #[test]
    fn huge_rationals_convert_to_float() {
        let big = Rat::new(BigInt::from(10).pow(400) * 3, BigInt::from(10).pow(400));
        assert!((rat_to_f64(&big) - 3.0).abs() < 1e-12);
        let tiny = Rat::new(BigInt::from(1), BigInt::from(10).pow(30));
        assert!((rat_to_f64(&tiny) / 1e-30 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn integer_powers() {
        assert_eq!(rat(2, 3).pow(3), rat(8, 27));
        assert_eq!(rat(2, 3).pow(-2), rat(9, 4));
        assert_eq!(factorial::<Rat>(5), rat(120, 1));
    }
}
