//! Exact rational scalars and the small integer toolkit the exact pipelines
//! share (gcd, lcm, Bezout coefficients, floor division).
//!
//! Rationals are [`BigRational`]s and serialize as `"p/q"` strings (or `"p"`
//! for integers). Hot loops convert to `i128` with checked arithmetic and
//! report [`RationalError::Overflow`] instead of wrapping.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

pub type Rational = BigRational;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RationalError {
    #[error("cannot parse rational literal `{0}` (expected `p` or `p/q`)")]
    Parse(String),
    #[error("zero denominator in `{0}`")]
    ZeroDenominator(String),
    #[error("integer overflow in exact arithmetic ({0})")]
    Overflow(&'static str),
}

pub fn parse_rational(text: &str) -> Result<Rational, RationalError> {
    let text = text.trim();
    let bad = || RationalError::Parse(text.to_string());
    let (num, den) = match text.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (text, "1"),
    };
    let num: BigInt = num.parse().map_err(|_| bad())?;
    let den: BigInt = den.parse().map_err(|_| bad())?;
    if den.is_zero() {
        return Err(RationalError::ZeroDenominator(text.to_string()));
    }
    Ok(Rational::new(num, den))
}

/// Parses a comma separated rational vector such as `1/2,0`.
pub fn parse_rational_vec(text: &str) -> Result<Vec<Rational>, RationalError> {
    text.split(',').map(parse_rational).collect()
}

pub fn format_rational(q: &Rational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

pub fn format_rational_vec(v: &[Rational]) -> String {
    v.iter().map(format_rational).collect::<Vec<_>>().join(",")
}

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn to_f64(q: &Rational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

/// Exact rational value of a finite float.
pub fn from_f64(x: f64) -> Option<Rational> {
    Rational::from_float(x)
}

/// Compares an exact rational against a float exactly.
pub fn cmp_f64(q: &Rational, x: f64) -> Ordering {
    match from_f64(x) {
        Some(r) => q.cmp(&r),
        None if x.is_nan() => Ordering::Less,
        None if x > 0.0 => Ordering::Less,
        None => Ordering::Greater,
    }
}

pub fn floor(q: &Rational) -> BigInt {
    q.floor().to_integer()
}

/// `q mod m` in `[0, m)` for a positive modulus.
pub fn rem_euclid(q: &Rational, m: &Rational) -> Rational {
    let k = (q / m).floor();
    q - k * m
}

pub fn to_i128(n: &BigInt) -> Result<i128, RationalError> {
    n.to_i128().ok_or(RationalError::Overflow("value exceeds i128"))
}

pub fn gcd_i128(a: i128, b: i128) -> i128 {
    a.gcd(&b)
}

pub fn lcm_i128(a: i128, b: i128) -> Result<i128, RationalError> {
    if a == 0 || b == 0 {
        return Ok(0);
    }
    let g = a.gcd(&b);
    (a / g)
        .checked_mul(b)
        .map(i128::abs)
        .ok_or(RationalError::Overflow("lcm"))
}

pub fn mul(a: i128, b: i128) -> Result<i128, RationalError> {
    a.checked_mul(b).ok_or(RationalError::Overflow("mul"))
}

pub fn add(a: i128, b: i128) -> Result<i128, RationalError> {
    a.checked_add(b).ok_or(RationalError::Overflow("add"))
}

pub fn sub(a: i128, b: i128) -> Result<i128, RationalError> {
    a.checked_sub(b).ok_or(RationalError::Overflow("sub"))
}

pub fn div_floor(a: i128, b: i128) -> i128 {
    Integer::div_floor(&a, &b)
}

pub fn div_ceil(a: i128, b: i128) -> i128 {
    -Integer::div_floor(&-a, &b)
}

/// Coefficients `c` with `c · u = gcd(u)` (extended Euclid folded over the vector).
pub fn bezout(u: &[i128]) -> Result<(i128, Vec<i128>), RationalError> {
    let mut g = 0i128;
    let mut coeffs = vec![0i128; u.len()];
    for (i, &ui) in u.iter().enumerate() {
        if ui == 0 {
            continue;
        }
        if g == 0 {
            g = ui.abs();
            coeffs[i] = ui.signum();
            continue;
        }
        let e = g.extended_gcd(&ui);
        // new gcd = e.x * g + e.y * ui
        for c in coeffs.iter_mut().take(i) {
            *c = mul(*c, e.x)?;
        }
        coeffs[i] = e.y;
        g = e.gcd;
        if g < 0 {
            g = -g;
            for c in coeffs.iter_mut().take(i + 1) {
                *c = -*c;
            }
        }
    }
    Ok((g, coeffs))
}

/// Common denominator of a rational vector and the integer numerators over it.
pub fn integerize(v: &[Rational]) -> Result<(i128, Vec<i128>), RationalError> {
    let mut den = BigInt::one();
    for q in v {
        den = den.lcm(q.denom());
    }
    let nums = v
        .iter()
        .map(|q| to_i128(&(q.numer() * (&den / q.denom()))))
        .collect::<Result<Vec<_>, _>>()?;
    Ok((to_i128(&den)?, nums))
}

pub fn from_i128(n: i128, d: i128) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn is_positive(q: &Rational) -> bool {
    q.is_positive()
}

/// Serde helpers: rationals as `"p/q"` strings.
pub mod serde_rational {
    use super::*;
    use serde::{de::Error as _, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(q: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(q))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let text = String::deserialize(d)?;
        parse_rational(&text).map_err(D::Error::custom)
    }

    pub mod vec {
        use super::*;
        use serde::ser::SerializeSeq;

        pub fn serialize<S: Serializer>(v: &[Rational], s: S) -> Result<S::Ok, S::Error> {
            let mut seq = s.serialize_seq(Some(v.len()))?;
            for q in v {
                seq.serialize_element(&format_rational(q))?;
            }
            seq.end()
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Rational>, D::Error> {
            let items = Vec::<String>::deserialize(d)?;
            items
                .iter()
                .map(|t| parse_rational(t).map_err(D::Error::custom))
                .collect()
        }
    }

    pub mod option {
        use super::*;

        pub fn serialize<S: Serializer>(q: &Option<Rational>, s: S) -> Result<S::Ok, S::Error> {
            match q {
                Some(q) => s.serialize_some(&format_rational(q)),
                None => s.serialize_none(),
            }
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(
            d: D,
        ) -> Result<Option<Rational>, D::Error> {
            Option::<String>::deserialize(d)?
                .map(|t| parse_rational(&t).map_err(D::Error::custom))
                .transpose()
        }
    }
}
