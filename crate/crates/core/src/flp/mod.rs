//! Reduced-precision floating-point emulation.
//!
//! Values are sign / biased-exponent / stored-mantissa triples with an
//! implicit leading one. There are no subnormals, infinities or NaNs: the
//! all-zero word encodes zero, every other word with a zero exponent field
//! is invalid, results below the smallest normal saturate to it and results
//! above the largest finite value saturate to that value.

mod ops;

pub use ops::{encode_real, flp_add, flp_mul, flp_sub, output_format, shift_exponent, Shifted};

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::rational::{pow2, scale_pow2};
use crate::Rational;

pub const MAX_EXP_BITS: u32 = 16;
pub const MAX_MAN_BITS: u32 = 52;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FlpError {
    #[error("invalid floating-point format: E={exp_bits}, M={man_bits}")]
    InvalidFormat { exp_bits: u32, man_bits: u32 },
    #[error("operands use different rounding modes")]
    MixedRounding,
    #[error("exponent biases differ ({0} vs {1}); rescale with shift_exponent first")]
    BiasMismatch(i32, i32),
    #[error("invalid encoding {bits:#x} for {fmt}")]
    InvalidEncoding { bits: u64, fmt: FlPFormat },
    #[error("cannot parse floating-point notation `{0}`")]
    Parse(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FlpRounding {
    /// Nearest, ties to even.
    #[serde(rename = "RN")]
    Nearest,
    /// Toward zero.
    #[serde(rename = "RZ")]
    TowardZero,
}

impl FlpRounding {
    pub fn tag(self) -> &'static str {
        match self {
            Self::Nearest => "RN",
            Self::TowardZero => "RZ",
        }
    }
}

/// Format `flt<E,M,RN|RZ[,bias]>`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FlPFormat {
    pub exp_bits: u32,
    pub man_bits: u32,
    pub rounding: FlpRounding,
    pub bias: i32,
}

impl FlPFormat {
    /// Format with the centered bias `2^(E−1) − 1`.
    pub fn new(exp_bits: u32, man_bits: u32, rounding: FlpRounding) -> Result<Self, FlpError> {
        if !(2..=MAX_EXP_BITS).contains(&exp_bits)
            || !(1..=MAX_MAN_BITS).contains(&man_bits)
            || exp_bits + man_bits + 1 > 64
        {
            return Err(FlpError::InvalidFormat { exp_bits, man_bits });
        }
        Ok(Self { exp_bits, man_bits, rounding, bias: Self::default_bias(exp_bits) })
    }

    pub fn with_bias(self, bias: i32) -> Self {
        Self { bias, ..self }
    }

    pub fn default_bias(exp_bits: u32) -> i32 {
        (1 << (exp_bits - 1)) - 1
    }

    pub fn has_default_bias(&self) -> bool {
        self.bias == Self::default_bias(self.exp_bits)
    }

    pub fn width(&self) -> u32 {
        self.exp_bits + self.man_bits + 1
    }

    pub fn max_biased_exp(&self) -> u32 {
        (1 << self.exp_bits) - 1
    }

    /// Smallest unbiased exponent of a nonzero value.
    pub fn emin(&self) -> i32 {
        1 - self.bias
    }

    pub fn emax(&self) -> i32 {
        self.max_biased_exp() as i32 - self.bias
    }

    pub fn extremes(&self) -> ExtremeSet {
        extremes(*self)
    }
}

impl fmt::Display for FlPFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "flt<{},{},{}", self.exp_bits, self.man_bits, self.rounding.tag())?;
        if !self.has_default_bias() {
            write!(f, ",{}", self.bias)?;
        }
        write!(f, ">")
    }
}

impl FromStr for FlPFormat {
    type Err = FlpError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || FlpError::Parse(s.to_string());
        let body = s.trim().strip_prefix("flt<").and_then(|b| b.strip_suffix('>')).ok_or_else(err)?;
        let parts: Vec<&str> = body.split(',').map(str::trim).collect();
        if parts.len() != 3 && parts.len() != 4 {
            return Err(err());
        }
        let e: u32 = parts[0].parse().map_err(|_| err())?;
        let m: u32 = parts[1].parse().map_err(|_| err())?;
        let rounding = match parts[2] {
            "RN" => FlpRounding::Nearest,
            "RZ" => FlpRounding::TowardZero,
            _ => return Err(err()),
        };
        let mut fmt = FlPFormat::new(e, m, rounding)?;
        if let Some(b) = parts.get(3) {
            fmt.bias = b.parse().map_err(|_| err())?;
        }
        Ok(fmt)
    }
}

impl Serialize for FlPFormat {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for FlPFormat {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

/// Extreme representable magnitudes of a format (and their negatives).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtremeSet {
    pub min_pos: Rational,
    pub max_pos: Rational,
}

impl ExtremeSet {
    pub fn min_neg(&self) -> Rational {
        -self.max_pos.clone()
    }

    pub fn max_neg(&self) -> Rational {
        -self.min_pos.clone()
    }
}

/// `min_pos = 2^(1−b)`, `max_pos = (2 − 2^−M) · 2^(2^E − 1 − b)`.
pub fn extremes(fmt: FlPFormat) -> ExtremeSet {
    let min_pos = pow2(fmt.emin() as i64);
    let max_pos = (pow2(1) - pow2(-(fmt.man_bits as i64))) * pow2(fmt.emax() as i64);
    ExtremeSet { min_pos, max_pos }
}

/// A floating-point value. Construction guarantees a valid encoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FlPValue {
    sign: bool,
    exp: u32,
    mant: u64,
    fmt: FlPFormat,
}

impl FlPValue {
    pub fn zero(fmt: FlPFormat) -> Self {
        Self { sign: false, exp: 0, mant: 0, fmt }
    }

    /// Builds a value from its fields; `exp` is the biased exponent field.
    pub fn from_parts(sign: bool, exp: u32, mant: u64, fmt: FlPFormat) -> Result<Self, FlpError> {
        let v = Self { sign, exp, mant, fmt };
        if exp > fmt.max_biased_exp() || mant >> fmt.man_bits != 0 || (exp == 0 && (sign || mant != 0)) {
            return Err(FlpError::InvalidEncoding { bits: v.to_bits(), fmt });
        }
        Ok(v)
    }

    pub fn from_bits(bits: u64, fmt: FlPFormat) -> Result<Self, FlpError> {
        let m = fmt.man_bits;
        let e = fmt.exp_bits;
        if e + m + 1 < 64 && bits >> (e + m + 1) != 0 {
            return Err(FlpError::InvalidEncoding { bits, fmt });
        }
        let mant = bits & ((1u64 << m) - 1);
        let exp = ((bits >> m) & ((1u64 << e) - 1)) as u32;
        let sign = (bits >> (e + m)) & 1 == 1;
        Self::from_parts(sign, exp, mant, fmt).map_err(|_| FlpError::InvalidEncoding { bits, fmt })
    }

    pub(crate) fn new_unchecked(sign: bool, exp: u32, mant: u64, fmt: FlPFormat) -> Self {
        debug_assert!(Self::from_parts(sign, exp, mant, fmt).is_ok());
        Self { sign, exp, mant, fmt }
    }

    /// All valid encodings of a format, in bit-pattern order.
    pub fn enumerate(fmt: FlPFormat) -> impl Iterator<Item = FlPValue> {
        let total = 1u64 << fmt.width();
        (0..total).filter_map(move |b| FlPValue::from_bits(b, fmt).ok())
    }

    pub fn max_value(fmt: FlPFormat, negative: bool) -> Self {
        Self::new_unchecked(negative, fmt.max_biased_exp(), (1u64 << fmt.man_bits) - 1, fmt)
    }

    pub fn min_value(fmt: FlPFormat, negative: bool) -> Self {
        Self::new_unchecked(negative, 1, 0, fmt)
    }

    pub fn to_bits(&self) -> u64 {
        let m = self.fmt.man_bits;
        ((self.sign as u64) << (self.fmt.exp_bits + m)) | ((self.exp as u64) << m) | self.mant
    }

    pub fn sign(&self) -> bool {
        self.sign
    }

    pub fn biased_exp(&self) -> u32 {
        self.exp
    }

    pub fn mantissa(&self) -> u64 {
        self.mant
    }

    pub fn format(&self) -> FlPFormat {
        self.fmt
    }

    pub fn is_zero(&self) -> bool {
        self.exp == 0
    }

    /// Unbiased exponent `e` of a nonzero value.
    pub fn exponent(&self) -> i32 {
        self.exp as i32 - self.fmt.bias
    }

    /// Significand `1.m` as an integer of `M + 1` bits.
    pub fn significand(&self) -> u64 {
        (1u64 << self.fmt.man_bits) | self.mant
    }

    pub fn neg(&self) -> Self {
        if self.is_zero() {
            *self
        } else {
            Self { sign: !self.sign, ..*self }
        }
    }

    pub fn abs(&self) -> Self {
        Self { sign: false, ..*self }
    }

    /// Exact value `(−1)^s · 1.m · 2^e`.
    pub fn decode(&self) -> Rational {
        if self.is_zero() {
            return Rational::from_integer(0.into());
        }
        let sig = Rational::from_integer(BigInt::from(self.significand()));
        let v = scale_pow2(&sig, self.exponent() as i64 - self.fmt.man_bits as i64);
        if self.sign {
            -v
        } else {
            v
        }
    }

    pub fn to_f64(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let e = self.exponent() - self.fmt.man_bits as i32;
        let v = self.significand() as f64 * 2f64.powi(e);
        if self.sign {
            -v
        } else {
            v
        }
    }

    /// Encodes a finite `f64` with the format's rounding and saturation rules.
    pub fn from_f64(x: f64, fmt: FlPFormat) -> Self {
        ops::from_f64(x, fmt)
    }

    /// Sign-magnitude ordering key; zero sits between negatives and positives.
    fn order_key(&self) -> (i8, u32, u64) {
        match (self.is_zero(), self.sign) {
            (true, _) => (0, 0, 0),
            (false, false) => (1, self.exp, self.mant),
            (false, true) => (-1, u32::MAX - self.exp, u64::MAX - self.mant),
        }
    }
}

impl PartialOrd for FlPValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        if self.fmt.exp_bits == other.fmt.exp_bits
            && self.fmt.man_bits == other.fmt.man_bits
            && self.fmt.bias == other.fmt.bias
        {
            Some(self.order_key().cmp(&other.order_key()))
        } else {
            Some(self.decode().cmp(&other.decode()))
        }
    }
}

/// Textual form `0x<bits>@flt<E,M,R>`.
impl fmt::Display for FlPValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let digits = self.fmt.width().div_ceil(4) as usize;
        write!(f, "{:#0w$x}@{}", self.to_bits(), self.fmt, w = digits + 2)
    }
}

impl FromStr for FlPValue {
    type Err = FlpError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || FlpError::Parse(s.to_string());
        let (bits, fmt) = s.split_once('@').ok_or_else(err)?;
        let bits = bits.trim();
        let bits = bits.strip_prefix("0x").unwrap_or(bits);
        let bits = u64::from_str_radix(bits, 16).map_err(|_| err())?;
        FlPValue::from_bits(bits, fmt.parse()?)
    }
}
