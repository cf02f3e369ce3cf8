//! Exact rational arithmetic used throughout the solver.
//!
//! Every quantity the solver touches (beliefs, valuations, transfers, LP
//! coefficients, certificates) is a [`Rational`]. There is no floating-point
//! fallback anywhere in a decision path: hull membership and separation are
//! open/strict conditions, and a tolerance would change answers.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{de, Deserialize, Deserializer, Serialize, Serializer};

use crate::Error;

/// Arbitrary-precision rational, stored in lowest terms with a positive
/// denominator. Equality, ordering and hashing are value-based.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rational(BigRational);

impl Rational {
    pub fn zero() -> Self {
        Rational(BigRational::zero())
    }

    pub fn one() -> Self {
        Rational(BigRational::one())
    }

    /// Builds `numer/denom`. Panics if `denom` is zero.
    pub fn new(numer: i64, denom: i64) -> Self {
        assert!(denom != 0, "zero denominator");
        Rational(BigRational::new(BigInt::from(numer), BigInt::from(denom)))
    }

    pub fn from_int(n: i64) -> Self {
        Rational(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn abs(&self) -> Self {
        Rational(self.0.abs())
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn recip(&self) -> Option<Self> {
        if self.is_zero() {
            None
        } else {
            Some(Rational(self.0.recip()))
        }
    }

    /// Strict parser for the wire format: an optional leading `-`, digits,
    /// and optionally `/` followed by digits for a positive denominator.
    /// No whitespace, no `+`, no zero denominator.
    pub fn parse(s: &str) -> Result<Self, Error> {
        let bad = || Error::InvalidRational { text: s.to_string() };
        let (num_str, den_str) = match s.split_once('/') {
            Some((n, d)) => (n, Some(d)),
            None => (s, None),
        };
        let digits = num_str.strip_prefix('-').unwrap_or(num_str);
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let numer: BigInt = num_str.parse().map_err(|_| bad())?;
        let denom: BigInt = match den_str {
            None => BigInt::one(),
            Some(d) => {
                if d.is_empty() || !d.bytes().all(|b| b.is_ascii_digit()) {
                    return Err(bad());
                }
                let d: BigInt = d.parse().map_err(|_| bad())?;
                if d.is_zero() {
                    return Err(bad());
                }
                d
            }
        };
        Ok(Rational(BigRational::new(numer, denom)))
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.denom().is_one() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl FromStr for Rational {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        Rational::parse(s)
    }
}

impl From<i64> for Rational {
    fn from(n: i64) -> Self {
        Rational::from_int(n)
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        Rational::parse(&s).map_err(|e| de::Error::custom(e.to_string()))
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident) => {
        impl $trait for Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational((self.0).$method(rhs.0))
            }
        }
        impl<'a> $trait<&'a Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: &'a Rational) -> Rational {
                Rational((self.0).$method(&rhs.0))
            }
        }
        impl<'a> $trait<Rational> for &'a Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational((&self.0).$method(rhs.0))
            }
        }
        impl<'a, 'b> $trait<&'b Rational> for &'a Rational {
            type Output = Rational;
            fn $method(self, rhs: &'b Rational) -> Rational {
                Rational((&self.0).$method(&rhs.0))
            }
        }
    };
}

binop!(Add, add);
binop!(Sub, sub);
binop!(Mul, mul);
binop!(Div, div);

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-self.0)
    }
}

impl Neg for &Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-&self.0)
    }
}

impl AddAssign<&Rational> for Rational {
    fn add_assign(&mut self, rhs: &Rational) {
        self.0 += &rhs.0;
    }
}

impl AddAssign for Rational {
    fn add_assign(&mut self, rhs: Rational) {
        self.0 += rhs.0;
    }
}

impl SubAssign<&Rational> for Rational {
    fn sub_assign(&mut self, rhs: &Rational) {
        self.0 -= &rhs.0;
    }
}

impl SubAssign for Rational {
    fn sub_assign(&mut self, rhs: Rational) {
        self.0 -= rhs.0;
    }
}

impl Sum for Rational {
    fn sum<I: Iterator<Item = Rational>>(iter: I) -> Rational {
        iter.fold(Rational::zero(), |acc, x| acc + x)
    }
}

impl<'a> Sum<&'a Rational> for Rational {
    fn sum<I: Iterator<Item = &'a Rational>>(iter: I) -> Rational {
        iter.fold(Rational::zero(), |acc, x| acc + x)
    }
}

/// Exact dot product. Lengths must match; callers check dimensions at their
/// own boundaries.
pub fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Rescales a rational vector by a positive factor to the unique integer
/// representative whose entries have gcd 1. Zero vectors are returned as-is.
///
/// Used to pin down separator directions reproducibly: scaling a separator by
/// a positive constant never changes the contract it induces.
pub fn primitive_integer_scale(values: &[Rational]) -> Vec<Rational> {
    if values.iter().all(Rational::is_zero) {
        return values.to_vec();
    }
    let mut lcm = BigInt::one();
    for v in values {
        lcm = lcm.lcm(v.denom());
    }
    let ints: Vec<BigInt> = values
        .iter()
        .map(|v| v.numer() * (&lcm / v.denom()))
        .collect();
    let mut gcd = BigInt::zero();
    for n in &ints {
        gcd = gcd.gcd(n);
    }
    ints.into_iter()
        .map(|n| Rational(BigRational::from_integer(n / &gcd)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(s: &str) -> Rational {
        s.parse().unwrap()
    }

    #[test]
    fn parse_and_display_round_trip() {
        for s in ["0", "7", "-3", "3/4", "-2/3", "123456789123456788/7"] {
            assert_eq!(q(s).to_string(), s);
        }
        // non-canonical inputs normalize
        assert_eq!(q("6/8").to_string(), "3/4");
        assert_eq!(q("-0").to_string(), "0");
        assert_eq!(q("04").to_string(), "4");
    }

    #[test]
    fn parse_rejects_malformed() {
        for s in ["", "1/0", "1/-2", "+1", "1.5", " 1", "1 ", "a", "1/", "/2", "--1", "1/+2"] {
            assert!(Rational::parse(s).is_err(), "accepted {s:?}");
        }
    }

    #[test]
    fn arithmetic_is_exact() {
        assert_eq!(q("1/3") + q("1/6"), q("1/2"));
        assert_eq!(q("3/4") * q("2/3"), q("1/2"));
        assert_eq!(q("1") / q("3"), q("1/3"));
        assert_eq!(-q("2/5"), q("-2/5"));
        assert_eq!(q("1/2") - q("1/2"), Rational::zero());
    }

    #[test]
    fn ordering_is_value_based() {
        assert!(q("1/3") < q("1/2"));
        assert!(q("-1/2") < q("0"));
        assert_eq!(q("2/4"), q("1/2"));
    }

    #[test]
    fn serde_uses_exact_strings() {
        let v = vec![q("3/4"), q("-2/3"), q("5")];
        let json = serde_json::to_string(&v).unwrap();
        assert_eq!(json, r#"["3/4","-2/3","5"]"#);
        let back: Vec<Rational> = serde_json::from_str(&json).unwrap();
        assert_eq!(back, v);
        assert!(serde_json::from_str::<Rational>("\"1.5\"").is_err());
        assert!(serde_json::from_str::<Rational>("0.5").is_err());
    }

    #[test]
    fn primitive_scaling() {
        assert_eq!(
            primitive_integer_scale(&[q("-2/3"), q("6")]),
            vec![q("-1"), q("9")]
        );
        assert_eq!(
            primitive_integer_scale(&[q("3/2"), q("-1/2")]),
            vec![q("3"), q("-1")]
        );
        assert_eq!(
            primitive_integer_scale(&[q("0"), q("0")]),
            vec![q("0"), q("0")]
        );
        assert_eq!(
            primitive_integer_scale(&[q("4"), q("6")]),
            vec![q("2"), q("3")]
        );
    }
}
