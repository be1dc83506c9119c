//! Exact rational helpers.
//!
//! Every quantity that feeds a decision (bin budgets, priorities, the load
//! lower bound) is kept as a `Ratio<i128>` so runs are reproducible across
//! platforms. Decimal strings such as `"0.05"` are parsed without ever
//! passing through floating point.

use std::fmt;

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type Rational = Ratio<i128>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("cannot parse `{input}` as an exact number: {reason}")]
pub struct ParseRationalError {
    pub input: String,
    pub reason: &'static str,
}

impl ParseRationalError {
    fn new(input: &str, reason: &'static str) -> Self {
        Self {
            input: input.to_string(),
            reason,
        }
    }
}

/// Parses `"3"`, `"-0.25"`, `"1.5e-3"` or `"1/20"` into an exact rational.
pub fn parse_rational(input: &str) -> Result<Rational, ParseRationalError> {
    let s = input.trim();
    if s.is_empty() {
        return Err(ParseRationalError::new(input, "empty"));
    }
    if let Some((num, den)) = s.split_once('/') {
        let num = parse_rational(num)?;
        let den = parse_rational(den)?;
        if den.is_zero() {
            return Err(ParseRationalError::new(input, "zero denominator"));
        }
        return Ok(num / den);
    }

    let (negative, body) = match s.as_bytes()[0] {
        b'-' => (true, &s[1..]),
        b'+' => (false, &s[1..]),
        _ => (false, s),
    };
    let (mantissa, exponent) = match body.find(['e', 'E']) {
        Some(pos) => {
            let exp: i32 = body[pos + 1..]
                .parse()
                .map_err(|_| ParseRationalError::new(input, "bad exponent"))?;
            (&body[..pos], exp)
        }
        None => (body, 0),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(ParseRationalError::new(input, "no digits"));
    }
    if !int_part
        .bytes()
        .chain(frac_part.bytes())
        .all(|b| b.is_ascii_digit())
    {
        return Err(ParseRationalError::new(input, "not a decimal number"));
    }

    let digits = format!("{int_part}{frac_part}");
    let mut numer: i128 = if digits.is_empty() {
        0
    } else {
        digits
            .parse()
            .map_err(|_| ParseRationalError::new(input, "too many digits"))?
    };
    let scale = exponent - frac_part.len() as i32;
    let mut denom: i128 = 1;
    let pow = 10i128
        .checked_pow(scale.unsigned_abs())
        .ok_or_else(|| ParseRationalError::new(input, "exponent out of range"))?;
    if scale >= 0 {
        numer = numer
            .checked_mul(pow)
            .ok_or_else(|| ParseRationalError::new(input, "value out of range"))?;
    } else {
        denom = pow;
    }
    if negative {
        numer = -numer;
    }
    Ok(Rational::new(numer, denom))
}

/// Largest integer not above `value`.
pub fn floor(value: &Rational) -> i128 {
    value.numer().div_floor(value.denom())
}

/// Smallest integer not below `value`.
pub fn ceil(value: &Rational) -> i128 {
    value.numer().div_ceil(value.denom())
}

/// Renders `value` with exactly `places` fractional digits, rounding half away
/// from zero. Pure integer arithmetic, so output is platform independent.
pub fn format_decimal(value: &Rational, places: u32) -> String {
    let scale = 10i128.pow(places);
    let scaled = value.abs() * Rational::from_integer(scale);
    let twice = scaled * Rational::from_integer(2);
    // round(x) = floor((2x + 1) / 2)
    let rounded = floor(&((twice + Rational::from_integer(1)) / Rational::from_integer(2)));
    let sign = if value.is_negative() && rounded != 0 {
        "-"
    } else {
        ""
    };
    if places == 0 {
        return format!("{sign}{rounded}");
    }
    let int = rounded / scale;
    let frac = rounded % scale;
    format!("{sign}{int}.{frac:0width$}", width = places as usize)
}

/// Serialized form of a rational: explicit numerator and denominator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fraction {
    pub numerator: i128,
    pub denominator: i128,
}

impl From<Rational> for Fraction {
    fn from(value: Rational) -> Self {
        Self {
            numerator: *value.numer(),
            denominator: *value.denom(),
        }
    }
}

impl TryFrom<Fraction> for Rational {
    type Error = ParseRationalError;

    fn try_from(value: Fraction) -> Result<Self, Self::Error> {
        if value.denominator == 0 {
            return Err(ParseRationalError::new(
                &format!("{}/{}", value.numerator, value.denominator),
                "zero denominator",
            ));
        }
        Ok(Rational::new(value.numerator, value.denominator))
    }
}

impl fmt::Display for Fraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.numerator, self.denominator)
    }
}
