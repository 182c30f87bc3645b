//! Exact rational helpers shared by the exact backends.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;

pub fn q(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

/// Parsed rational plus a flag telling whether it came from a decimal literal.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedRational {
    pub value: Rational,
    pub from_decimal: bool,
}

/// Parses `p/q`, an integer, or a finite decimal such as `0.125`.
pub fn parse(text: &str) -> Result<ParsedRational> {
    let s = text.trim();
    if s.is_empty() {
        return Err(Error::Parse("empty rational".into()));
    }
    if let Some((p, d)) = s.split_once('/') {
        let num: BigInt = p.trim().parse().map_err(|_| bad(s))?;
        let den: BigInt = d.trim().parse().map_err(|_| bad(s))?;
        if den.is_zero() {
            return Err(Error::Parse(format!("zero denominator in {s:?}")));
        }
        return Ok(ParsedRational { value: Rational::new(num, den), from_decimal: false });
    }
    if let Some((whole, frac)) = s.split_once('.') {
        let negative = whole.starts_with('-');
        let digits = format!("{}{}", whole.trim_start_matches(['-', '+']), frac);
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad(s));
        }
        let num: BigInt = digits.parse().map_err(|_| bad(s))?;
        let den = num_traits::pow(BigInt::from(10), frac.len());
        let mut value = Rational::new(num, den);
        if negative {
            value = -value;
        }
        return Ok(ParsedRational { value, from_decimal: true });
    }
    let num: BigInt = s.parse().map_err(|_| bad(s))?;
    Ok(ParsedRational { value: Rational::from_integer(num), from_decimal: false })
}

fn bad(s: &str) -> Error {
    Error::Parse(format!("not a rational: {s:?}"))
}

/// Formats as `p/q` (always with an explicit denominator).
pub fn format(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Fractional part in `[0, 1)`.
pub fn frac(r: &Rational) -> Rational {
    r - r.floor()
}

/// Distance to the nearest integer, `min_m |t - m|`.
pub fn circle_norm(r: &Rational) -> Rational {
    let f = frac(r);
    let other = Rational::one() - &f;
    if other < f {
        other
    } else {
        f
    }
}

pub fn abs_diff(a: &Rational, b: &Rational) -> Rational {
    (a - b).abs()
}

/// Serde adapter storing rationals as `"p/q"` strings.
pub mod serde_str {
    use super::*;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&format(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Rational, D::Error> {
        let text = String::deserialize(d)?;
        parse(&text).map(|p| p.value).map_err(serde::de::Error::custom)
    }
}

/// Serde adapter for `Vec<Rational>` as a list of `"p/q"` strings.
pub mod serde_vec {
    use super::*;
    use serde::ser::SerializeSeq;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[Rational], s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(v.len()))?;
        for r in v {
            seq.serialize_element(&format(r))?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<Rational>, D::Error> {
        let texts = Vec::<String>::deserialize(d)?;
        texts.iter().map(|t| parse(t).map(|p| p.value).map_err(serde::de::Error::custom)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fraction_integer_and_decimal() {
        assert_eq!(parse("3/6").unwrap().value, q(1, 2));
        assert_eq!(parse("-2").unwrap().value, int(-2));
        let d = parse("0.125").unwrap();
        assert!(d.from_decimal);
        assert_eq!(d.value, q(1, 8));
        assert_eq!(parse("-1.5").unwrap().value, q(-3, 2));
        assert!(parse("1/0").is_err());
        assert!(parse("abc").is_err());
    }

    #[test]
    fn circle_norm_folds() {
        assert_eq!(circle_norm(&q(3, 4)), q(1, 4));
        assert_eq!(circle_norm(&q(-1, 3)), q(1, 3));
        assert_eq!(circle_norm(&q(5, 2)), q(1, 2));
        assert_eq!(circle_norm(&int(7)), int(0));
    }

    #[test]
    fn format_has_explicit_denominator() {
        assert_eq!(format(&q(2, 243)), "2/243");
        assert_eq!(format(&int(1)), "1/1");
    }
}
