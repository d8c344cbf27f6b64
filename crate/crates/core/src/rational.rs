//! Exact rational numbers and the handful of conversions the rest of the
//! crate needs (ceilings, decimal rendering, string serde).

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Arbitrary-precision rational, always in lowest terms with a positive
/// denominator.
pub type Rational = BigRational;

pub fn rat(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

pub fn from_u64(v: u64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

/// `count / total` as an exact rational. `total` must be nonzero.
pub fn ratio(count: u64, total: u64) -> Rational {
    Rational::new(BigInt::from(count), BigInt::from(total))
}

/// Parses `"p/q"`, an integer, or a finite decimal such as `"0.05"`.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a rational number: {s:?}"));
    if s.is_empty() {
        return Err(bad());
    }
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| bad())?;
        let q: BigInt = q.trim().parse().map_err(|_| bad())?;
        if q.is_zero() {
            return Err(Error::Parse(format!("zero denominator in {s:?}")));
        }
        return Ok(Rational::new(p, q));
    }
    if let Some((whole, frac)) = s.split_once('.') {
        let negative = whole.starts_with('-');
        let digits = whole.trim_start_matches(['-', '+']);
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        if !digits.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let joined: BigInt = format!("{}{}", if digits.is_empty() { "0" } else { digits }, frac)
            .parse()
            .map_err(|_| bad())?;
        let scale = num_traits::pow(BigInt::from(10u32), frac.len());
        let r = Rational::new(joined, scale);
        return Ok(if negative { -r } else { r });
    }
    let n: BigInt = s.parse().map_err(|_| bad())?;
    Ok(Rational::from_integer(n))
}

/// `p/q`, or just `p` for integers.
pub fn format_fraction(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Decimal rendering rounded half away from zero to `digits` places.
pub fn format_decimal(r: &Rational, digits: usize) -> String {
    let scale = num_traits::pow(BigInt::from(10u32), digits);
    let scaled = r.abs() * Rational::from_integer(scale.clone());
    let half = rat(1, 2);
    let rounded = (scaled + half).floor().to_integer();
    let (whole, frac) = rounded.div_rem(&scale);
    let sign = if r.is_negative() && !rounded.is_zero() { "-" } else { "" };
    if digits == 0 {
        return format!("{sign}{whole}");
    }
    let frac = frac.to_string();
    format!("{sign}{whole}.{}{frac}", "0".repeat(digits - frac.len()))
}

pub fn ceil_int(r: &Rational) -> BigInt {
    r.ceil().to_integer()
}

pub fn floor_int(r: &Rational) -> BigInt {
    r.floor().to_integer()
}

/// Clamps a big integer into `u64`; negatives become 0, overflow saturates.
pub fn saturating_u64(v: &BigInt) -> u64 {
    match v.sign() {
        Sign::Minus | Sign::NoSign => 0,
        Sign::Plus => v.to_u64().unwrap_or(u64::MAX),
    }
}

/// Lossy conversion for display and plotting only.
pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Serde adapter storing a [`Rational`] as its `p/q` string.
pub mod serde_str {
    use serde::{Deserialize, Deserializer, Serializer};

    use super::{format_fraction, parse_rational, Rational};

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_fraction(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        parse_rational(&s).map_err(serde::de::Error::custom)
    }
}

/// Same as [`serde_str`] for `Option<Rational>`.
pub mod serde_opt_str {
    use serde::{Deserialize, Deserializer, Serializer};

    use super::{format_fraction, parse_rational, Rational};

    pub fn serialize<S: Serializer>(r: &Option<Rational>, s: S) -> Result<S::Ok, S::Error> {
        match r {
            Some(r) => s.serialize_str(&format_fraction(r)),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Rational>, D::Error> {
        let s = Option::<String>::deserialize(d)?;
        s.map(|s| parse_rational(&s).map_err(serde::de::Error::custom))
            .transpose()
    }
}
