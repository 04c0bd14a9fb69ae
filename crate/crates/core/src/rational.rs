//! Exact rational arithmetic used for model coefficients and feasibility checks.

use num_integer::Integer;
use num_traits::{Signed, Zero};
use std::fmt;

pub type Rational = num_rational::Ratio<i128>;

pub fn int(v: i64) -> Rational {
    Rational::from_integer(v as i128)
}

pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(n as i128, d as i128)
}

pub fn to_f64(r: &Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Least common multiple of the denominators in `values` (1 for an empty input).
pub fn denominator_lcm<'a>(values: impl IntoIterator<Item = &'a Rational>) -> i128 {
    values.into_iter().fold(1i128, |acc, r| acc.lcm(r.denom()))
}

pub fn abs(r: &Rational) -> Rational {
    r.abs()
}

/// Renders `3`, `-1/2`, ... in the canonical reduced form used in JSON files.
pub fn format(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseRationalError(pub String);

impl fmt::Display for ParseRationalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "cannot parse `{}` as a rational number", self.0)
    }
}

impl std::error::Error for ParseRationalError {}

/// Accepts `p`, `p/q` and finite decimal notation such as `-0.25` or `1e-2`.
pub fn parse(text: &str) -> Result<Rational, ParseRationalError> {
    let err = || ParseRationalError(text.to_string());
    let s = text.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n: i128 = n.trim().parse().map_err(|_| err())?;
        let d: i128 = d.trim().parse().map_err(|_| err())?;
        if d == 0 {
            return Err(err());
        }
        return Ok(Rational::new(n, d));
    }
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(pos) => (&s[..pos], s[pos + 1..].parse::<i32>().map_err(|_| err())?),
        None => (s, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (whole, frac) = digits.split_once('.').unwrap_or((digits, ""));
    if whole.is_empty() && frac.is_empty() {
        return Err(err());
    }
    if !whole.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return Err(err());
    }
    let combined = format!("{whole}{frac}");
    let numer: i128 = if combined.is_empty() { 0 } else { combined.parse().map_err(|_| err())? };
    let scale = exponent - frac.len() as i32;
    if scale.abs() > 30 {
        return Err(err());
    }
    let pow = 10i128.pow(scale.unsigned_abs());
    let mut value = if scale >= 0 {
        Rational::from_integer(numer.checked_mul(pow).ok_or_else(err)?)
    } else {
        Rational::new(numer, pow)
    };
    if negative && !value.is_zero() {
        value = -value;
    }
    Ok(value)
}

/// Serde adapter: integers become JSON numbers, everything else a `"p/q"` string.
pub mod serde_rational {
    use super::*;
    use serde::de::Error as _;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        if r.is_integer() {
            if let Ok(v) = i64::try_from(*r.numer()) {
                return s.serialize_i64(v);
            }
        }
        s.serialize_str(&format(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let value = serde_json::Value::deserialize(d)?;
        match value {
            serde_json::Value::Number(n) => parse(&n.to_string()).map_err(D::Error::custom),
            serde_json::Value::String(s) => parse(&s).map_err(D::Error::custom),
            other => Err(D::Error::custom(format!("expected a rational, found {other}"))),
        }
    }
}

/// Same as [`serde_rational`] for `BTreeMap<usize, Rational>` values.
pub mod serde_rational_map {
    use super::*;
    use serde::ser::SerializeMap;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};
    use std::collections::BTreeMap;

    #[derive(Serialize, Deserialize)]
    struct Wrap(#[serde(with = "super::serde_rational")] Rational);

    pub fn serialize<S: Serializer>(m: &BTreeMap<usize, Rational>, s: S) -> Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(m.len()))?;
        for (k, v) in m {
            map.serialize_entry(&k.to_string(), &Wrap(*v))?;
        }
        map.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<usize, Rational>, D::Error> {
        let raw: BTreeMap<String, Wrap> = BTreeMap::deserialize(d)?;
        raw.into_iter()
            .map(|(k, Wrap(v))| {
                k.parse::<usize>()
                    .map(|k| (k, v))
                    .map_err(|_| serde::de::Error::custom(format!("bad variable id `{k}`")))
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_common_forms() {
        assert_eq!(parse("3").unwrap(), int(3));
        assert_eq!(parse("-1/2").unwrap(), ratio(-1, 2));
        assert_eq!(parse("0.25").unwrap(), ratio(1, 4));
        assert_eq!(parse("-2.5e1").unwrap(), int(-25));
        assert_eq!(parse("1e-2").unwrap(), ratio(1, 100));
        assert!(parse("abc").is_err());
        assert!(parse("1/0").is_err());
    }

    #[test]
    fn format_round_trips() {
        for r in [int(0), int(-7), ratio(3, 8), ratio(-10, 4)] {
            assert_eq!(parse(&format(&r)).unwrap(), r);
        }
    }

    #[test]
    fn lcm_of_denominators() {
        assert_eq!(denominator_lcm(&[ratio(1, 2), ratio(1, 3), int(4)]), 6);
        assert_eq!(denominator_lcm(&[]), 1);
    }
}
