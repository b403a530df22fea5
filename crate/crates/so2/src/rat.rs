//! Exact rational scalars and their "p/q" wire format.

use crate::Error;
use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, Zero};
use std::str::FromStr;

/// Exact rational number. Always in lowest terms with positive denominator.
pub type Rat = BigRational;

/// Rational from an integer.
pub fn rat(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// Rational from a numerator/denominator pair. Panics on zero denominator;
/// use [`parse_rat`] for untrusted input.
pub fn ratio(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

pub fn is_zero(x: &Rat) -> bool {
    x.is_zero()
}

/// Serializes as "p" for integers and "p/q" otherwise.
pub fn format_rat(x: &Rat) -> String {
    x.to_string()
}

/// Parses "p" or "p/q". Zero denominators and malformed digits are errors.
pub fn parse_rat(s: &str) -> Result<Rat, Error> {
    Rat::from_str(s.trim()).map_err(|e| Error::parse(s, e.to_string()))
}

/// Sign of a rational as -1, 0, 1.
pub fn sign(x: &Rat) -> i8 {
    if x.is_zero() {
        0
    } else if x.is_positive() {
        1
    } else {
        -1
    }
}

pub fn one() -> Rat {
    Rat::one()
}

pub fn zero() -> Rat {
    Rat::zero()
}
