//! Exact rational helpers shared by the fixed-point and floating-point cores.

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::Rational;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("cannot parse `{0}` as an exact rational")]
pub struct ParseRationalError(pub String);

/// `2^k` as an exact rational, for any sign of `k`.
pub fn pow2(k: i64) -> Rational {
    let mag = BigInt::one() << k.unsigned_abs();
    if k >= 0 {
        Rational::from_integer(mag)
    } else {
        Rational::new_raw(BigInt::one(), mag)
    }
}

/// `x · 2^k`, exact.
pub fn scale_pow2(x: &Rational, k: i64) -> Rational {
    if k >= 0 {
        Rational::new(x.numer() << k as u64, x.denom().clone())
    } else {
        Rational::new(x.numer().clone(), x.denom() << k.unsigned_abs())
    }
}

fn bit_len(x: &BigInt) -> i64 {
    x.bits() as i64
}

/// `⌊log2 |x|⌋` for nonzero `x`.
pub fn floor_log2(x: &Rational) -> i64 {
    assert!(!x.is_zero(), "log2 of zero");
    let num = x.numer().abs();
    let den = x.denom().abs();
    let mut e = bit_len(&num) - bit_len(&den);
    // 2^e <= |x| < 2^(e+1) holds for e or e-1
    let lhs = if e >= 0 { num.clone() } else { &num << (-e) as u64 };
    let rhs = if e >= 0 { &den << e as u64 } else { den.clone() };
    if lhs < rhs {
        e -= 1;
    }
    e
}

/// `⌈log2 |x|⌉` for nonzero `x`.
pub fn ceil_log2(x: &Rational) -> i64 {
    let f = floor_log2(x);
    if x.abs() == pow2(f) {
        f
    } else {
        f + 1
    }
}

/// Exact conversion from a finite `f64`.
pub fn from_f64(x: f64) -> Option<Rational> {
    BigRational::from_float(x)
}

/// Nearest `f64` (ties handled by the underlying conversion).
pub fn to_f64(x: &Rational) -> f64 {
    x.to_f64().unwrap_or_else(|| if x.is_negative() { f64::NEG_INFINITY } else { f64::INFINITY })
}

/// True when the denominator is a power of two.
pub fn is_dyadic(x: &Rational) -> bool {
    let d = x.denom();
    d.is_one() || (d.trailing_zeros().unwrap_or(0) + 1 == d.bits())
}

/// Exact decimal expansion when the denominator only has factors 2 and 5,
/// otherwise `p/q`.
pub fn to_decimal_string(x: &Rational) -> String {
    let mut den = x.denom().clone();
    let two = BigInt::from(2);
    let five = BigInt::from(5);
    let mut twos = 0u32;
    let mut fives = 0u32;
    while den.is_even() {
        den /= &two;
        twos += 1;
    }
    while (&den % &five).is_zero() {
        den /= &five;
        fives += 1;
    }
    if !den.is_one() {
        return format!("{}/{}", x.numer(), x.denom());
    }
    let digits = twos.max(fives);
    let scaled = x * Rational::from_integer(BigInt::from(10).pow(digits));
    debug_assert!(scaled.is_integer());
    let int = scaled.to_integer();
    let neg = int.sign() == Sign::Minus;
    let mut s = int.abs().to_string();
    if digits > 0 {
        let d = digits as usize;
        if s.len() <= d {
            s = format!("{}{}", "0".repeat(d + 1 - s.len()), s);
        }
        s.insert(s.len() - d, '.');
    }
    if neg {
        s.insert(0, '-');
    }
    s
}

/// Parses `p/q`, plain integers, decimals and `e` exponents exactly.
pub fn parse_rational(s: &str) -> Result<Rational, ParseRationalError> {
    let err = || ParseRationalError(s.to_string());
    let t = s.trim();
    if t.is_empty() {
        return Err(err());
    }
    if let Some((p, q)) = t.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| err())?;
        let q: BigInt = q.trim().parse().map_err(|_| err())?;
        if q.is_zero() {
            return Err(err());
        }
        return Ok(Rational::new(p, q));
    }
    let (mantissa, exp) = match t.find(['e', 'E']) {
        Some(i) => {
            let e: i64 = t[i + 1..].parse().map_err(|_| err())?;
            (&t[..i], e)
        }
        None => (t, 0),
    };
    let (neg, body) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(err());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(err());
    }
    let digits = format!("{int_part}{frac_part}");
    let num: BigInt = if digits.is_empty() { BigInt::zero() } else { digits.parse().map_err(|_| err())? };
    let ten = BigInt::from(10);
    let e = exp - frac_part.len() as i64;
    let e_abs = u32::try_from(e.unsigned_abs()).map_err(|_| err())?;
    let mut r = if e >= 0 { Rational::from_integer(num * ten.pow(e_abs)) } else { Rational::new(num, ten.pow(e_abs)) };
    if neg {
        r = -r;
    }
    Ok(r)
}

/// Serde adapter writing rationals as exact strings.
pub mod serde_str {
    use super::*;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&to_decimal_string(x))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Str(String),
            Int(i64),
            Float(f64),
        }
        match Repr::deserialize(d)? {
            Repr::Str(s) => parse_rational(&s).map_err(serde::de::Error::custom),
            Repr::Int(i) => Ok(Rational::from_integer(i.into())),
            Repr::Float(f) => from_f64(f).ok_or_else(|| serde::de::Error::custom("non-finite number")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(s: &str) -> Rational {
        parse_rational(s).unwrap()
    }

    #[test]
    fn logs() {
        assert_eq!(floor_log2(&q("3.9")), 1);
        assert_eq!(ceil_log2(&q("4")), 2);
        assert_eq!(floor_log2(&q("0.3")), -2);
        assert_eq!(ceil_log2(&q("0.4")), -1);
        assert_eq!(floor_log2(&q("-1")), 0);
        assert_eq!(ceil_log2(&q("1")), 0);
        assert_eq!(floor_log2(&q("1/3")), -2);
    }

    #[test]
    fn decimal_strings() {
        assert_eq!(to_decimal_string(&q("32767.9999847412109375")), "32767.9999847412109375");
        assert_eq!(to_decimal_string(&(pow2(15) - pow2(-16))), "32767.9999847412109375");
        assert_eq!(to_decimal_string(&q("-0.078125")), "-0.078125");
        assert_eq!(to_decimal_string(&q("-7")), "-7");
        assert_eq!(to_decimal_string(&q("1/3")), "1/3");
        assert_eq!(to_decimal_string(&q("0.05")), "0.05");
    }

    #[test]
    fn parsing() {
        assert_eq!(q("1.5e-3"), Rational::new(3.into(), 2000.into()));
        assert_eq!(q("-3/4"), Rational::new((-3).into(), 4.into()));
        assert_eq!(q(".5"), Rational::new(1.into(), 2.into()));
        assert!(parse_rational("abc").is_err());
        assert!(parse_rational("1/0").is_err());
        assert!(is_dyadic(&q("0.375")));
        assert!(!is_dyadic(&q("0.1")));
    }
}
