//! Ordered-field abstraction shared by every numeric routine.
//!
//! Two instantiations are provided: [`Rational`] (exact, arbitrary precision)
//! and `f64`. Routines that must be exact (total positivity, checkerboard
//! tests, certified bound comparisons) are run with [`Rational`].

use std::fmt::{Debug, Display};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, One, Signed, ToPrimitive, Zero};

/// Exact rational scalar.
pub type Rational = BigRational;

pub trait Scalar: Clone + Debug + Display + PartialOrd + Signed + Send + Sync + 'static {
    /// `true` when arithmetic is exact.
    const EXACT: bool;

    fn from_ratio(num: i64, den: i64) -> Self;

    fn from_rational(r: &Rational) -> Self;

    fn to_f64(&self) -> f64;

    /// Rendering used in JSON dumps: `"p/q"` for rationals, shortest
    /// round-trip decimal for floats.
    fn to_exact_string(&self) -> String;

    /// Relative slack applied to bound comparisons. Zero for exact scalars.
    fn comparison_slack() -> Self;

    fn from_int(n: i64) -> Self {
        Self::from_ratio(n, 1)
    }

    /// `self * other` without consuming either operand.
    fn mul_ref(&self, other: &Self) -> Self {
        self.clone() * other.clone()
    }

    /// `self += other` in place.
    fn add_assign_ref(&mut self, other: &Self) {
        let lhs = std::mem::replace(self, Self::zero());
        *self = lhs + other.clone();
    }

    fn recip(&self) -> Self {
        Self::one() / self.clone()
    }

    fn square(&self) -> Self {
        self.clone() * self.clone()
    }

    fn powi(&self, exp: u32) -> Self {
        let mut acc = Self::one();
        let mut base = self.clone();
        let mut e = exp;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base.clone();
            }
            e >>= 1;
            if e > 0 {
                base = base.square();
            }
        }
        acc
    }

    fn min_of(a: Self, b: Self) -> Self {
        if b < a {
            b
        } else {
            a
        }
    }

    fn max_of(a: Self, b: Self) -> Self {
        if b > a {
            b
        } else {
            a
        }
    }
}

/// `lhs <= rhs` up to the scalar's comparison slack (relative to `|rhs|`).
pub fn le_with_slack<S: Scalar>(lhs: &S, rhs: &S) -> bool {
    if S::EXACT {
        return lhs <= rhs;
    }
    let slack = rhs.abs() * S::comparison_slack();
    *lhs <= rhs.clone() + slack
}

impl Scalar for Rational {
    const EXACT: bool = true;

    fn from_ratio(num: i64, den: i64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or_else(|| {
            // Fallback for magnitudes that overflow the naive conversion.
            let num = self.numer().to_f64().unwrap_or(f64::NAN);
            let den = self.denom().to_f64().unwrap_or(f64::NAN);
            num / den
        })
    }

    fn to_exact_string(&self) -> String {
        if self.denom().is_one() {
            self.numer().to_string()
        } else {
            format!("{}/{}", self.numer(), self.denom())
        }
    }

    fn comparison_slack() -> Self {
        Self::zero()
    }

    fn mul_ref(&self, other: &Self) -> Self {
        self * other
    }

    fn add_assign_ref(&mut self, other: &Self) {
        *self += other;
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn from_ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }

    fn from_rational(r: &Rational) -> Self {
        Scalar::to_f64(r)
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn to_exact_string(&self) -> String {
        format!("{self:?}")
    }

    fn comparison_slack() -> Self {
        1e-12
    }
}

/// Serializes a scalar through [`Scalar::to_exact_string`].
pub fn serialize_scalar<S: Scalar, Ser: serde::Serializer>(
    value: &S,
    serializer: Ser,
) -> Result<Ser::Ok, Ser::Error> {
    serializer.serialize_str(&value.to_exact_string())
}

/// JSON value for a scalar: exact strings for rationals, numbers for floats.
pub fn scalar_json<S: Scalar>(value: &S) -> serde_json::Value {
    if S::EXACT {
        serde_json::Value::String(value.to_exact_string())
    } else {
        serde_json::Number::from_f64(value.to_f64())
            .map(serde_json::Value::Number)
            .unwrap_or(serde_json::Value::Null)
    }
}

/// Parses `"p/q"`, `"p"` or a decimal literal into an exact rational.
pub fn parse_rational(text: &str) -> Option<Rational> {
    let text = text.trim();
    if let Some((p, q)) = text.split_once('/') {
        let p: BigInt = p.trim().parse().ok()?;
        let q: BigInt = q.trim().parse().ok()?;
        if q.is_zero() {
            return None;
        }
        return Some(BigRational::new(p, q));
    }
    if let Ok(p) = text.parse::<BigInt>() {
        return Some(BigRational::from_integer(p));
    }
    let value: f64 = text.parse().ok()?;
    BigRational::from_f64(value)
}

/// Exact rational image of a finite float (every finite `f64` is a dyadic rational).
pub fn rational_from_f64(value: f64) -> Option<Rational> {
    BigRational::from_f64(value)
}
