//! Exact rational arithmetic helpers.
//!
//! Every quantity in this crate (entropies, rates, weights, thresholds) is an
//! arbitrary-precision rational. Values serialize as `"p/q"` in lowest terms,
//! or as a bare integer when the denominator is one; both forms parse back.

use std::str::FromStr;

use num_bigint::BigInt;

use crate::error::{Error, Result};

/// Arbitrary-precision rational number used for all exact quantities.
pub type Rational = num_rational::BigRational;

/// Builds a rational from an integer numerator and denominator.
///
/// Panics if `den` is zero; intended for literals in code and tests.
pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// Builds a rational from an integer.
pub fn int(value: i64) -> Rational {
    Rational::from_integer(BigInt::from(value))
}

/// Parses `"p/q"` or `"p"` into a rational in lowest terms.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let trimmed = text.trim();
    if trimmed.is_empty() {
        return Err(Error::InvalidRational(text.to_string()));
    }
    Rational::from_str(trimmed).map_err(|_| Error::InvalidRational(text.to_string()))
}

/// Formats a rational in lowest terms, omitting the denominator when it is 1.
pub fn format_rational(value: &Rational) -> String {
    value.to_string()
}
