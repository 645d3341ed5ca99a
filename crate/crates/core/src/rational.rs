//! Exact rational arithmetic for all stake, profit, and threshold math.
//!
//! Every comparison in the analysis is strict-vs-non-strict sensitive, so no
//! floating point is used anywhere. Values are [`num_rational::BigRational`]
//! and are always kept in lowest terms by construction.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use std::str::FromStr;

use crate::error::{Error, Result};

pub type Rational = num_rational::BigRational;

/// Shorthand for building a rational from machine integers.
pub fn rat(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn rat_int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

fn bad(text: &str, reason: impl Into<String>) -> Error {
    Error::BadNumber {
        text: text.to_string(),
        reason: reason.into(),
    }
}

/// Parses a numeric literal: either a fraction `"p/q"` (q > 0) or a plain
/// decimal such as `"3"` or `"0.1"`. Decimals are converted exactly; there is
/// no exponent syntax and no precision loss.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let t = text.trim();
    if t.is_empty() {
        return Err(bad(text, "empty string"));
    }
    if let Some((p, q)) = t.split_once('/') {
        let p = BigInt::from_str(p.trim()).map_err(|e| bad(text, format!("numerator: {e}")))?;
        let q = BigInt::from_str(q.trim()).map_err(|e| bad(text, format!("denominator: {e}")))?;
        if q.is_zero() {
            return Err(bad(text, "zero denominator"));
        }
        if q.is_negative() {
            return Err(bad(text, "denominator must be positive"));
        }
        return Ok(Rational::new(p, q));
    }
    if let Some((whole, frac)) = t.split_once('.') {
        let (sign, whole_digits) = match whole.strip_prefix('-') {
            Some(rest) => (-1, rest),
            None => (1, whole.strip_prefix('+').unwrap_or(whole)),
        };
        if whole_digits.is_empty() && frac.is_empty() {
            return Err(bad(text, "no digits"));
        }
        if !whole_digits.chars().all(|c| c.is_ascii_digit())
            || !frac.chars().all(|c| c.is_ascii_digit())
        {
            return Err(bad(text, "decimal literals may contain only digits"));
        }
        let whole_part = if whole_digits.is_empty() {
            BigInt::zero()
        } else {
            BigInt::from_str(whole_digits).map_err(|e| bad(text, e.to_string()))?
        };
        let mut value = Rational::from_integer(whole_part);
        if !frac.is_empty() {
            let numer = BigInt::from_str(frac).map_err(|e| bad(text, e.to_string()))?;
            let denom = BigInt::from(10u8).pow(frac.len() as u32);
            value += Rational::new(numer, denom);
        }
        if sign < 0 {
            value = -value;
        }
        return Ok(value);
    }
    let n = BigInt::from_str(t).map_err(|e| bad(text, e.to_string()))?;
    Ok(Rational::from_integer(n))
}

/// Canonical rendering: lowest terms, `"p/q"`, with `/1` omitted for integers.
pub fn format_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Serde adapter carrying rationals through their exact text form, for use
/// with `#[serde(with = "crate::rational::rational_serde")]`.
pub mod rational_serde {
    use serde::{Deserialize, Deserializer, Serializer};

    use super::{format_rational, parse_rational, Rational};

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let text = String::deserialize(d)?;
        parse_rational(&text).map_err(serde::de::Error::custom)
    }
}

/// Decimal approximation for human-facing output only. Marked approximate by
/// the caller; never fed back into any computation.
pub fn approx_decimal(r: &Rational) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().unwrap_or(f64::NAN)
}
