//! Bit-exact fixed-point arithmetic.
//!
//! A value is a two's-complement integer `raw` together with a [`QFormat`]
//! `Qm.n`; its real value is `raw · 2^-n`. Arithmetic is computed exactly and
//! then brought into the requested output format with one of the rounding
//! modes of [`RoundingModeFxp`] and one of the overflow modes of
//! [`OverflowMode`].

mod format;
mod ops;

pub use format::QFormat;
pub use ops::{
    convert, decode, encode, encode_f64, fxp_add, fxp_add_sub, fxp_div, fxp_div_into, fxp_mul, fxp_mul_into, fxp_sub,
    propagate_format, quantize, range_of, AddSub, ArithOp,
};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::Rational;

/// Widest supported signed format; raw values live in an `i128`.
pub const MAX_WIDTH: i32 = 128;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FxpError {
    #[error("invalid fixed-point format Q{m}.{n}: total width must be in 1..={max}")]
    InvalidFormat { m: i32, n: i32, max: i32 },
    #[error("raw value {raw} does not fit in {fmt}")]
    RawOutOfRange { raw: i128, fmt: QFormat },
    #[error("division by zero")]
    DivisionByZero,
    #[error("cannot quantize from {from} to {to} fractional bits: quantization only discards bits")]
    PrecisionIncrease { from: i32, to: i32 },
    #[error("cannot parse fixed-point notation `{0}`")]
    Parse(String),
}

/// Quantization mode used when least-significant bits are discarded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RoundingModeFxp {
    /// Round toward −∞ (plain bit dropping).
    Truncate,
    /// Round to nearest, midpoint always up (conventional rounding).
    NearestUp,
    /// Round to nearest, midpoint to the even grid value (convergent rounding).
    NearestEven,
}

impl RoundingModeFxp {
    pub const ALL: [RoundingModeFxp; 3] = [Self::Truncate, Self::NearestUp, Self::NearestEven];

    pub fn short_name(self) -> &'static str {
        match self {
            Self::Truncate => "trn",
            Self::NearestUp => "rnu",
            Self::NearestEven => "rne",
        }
    }
}

impl FromStr for RoundingModeFxp {
    type Err = FxpError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "trn" | "truncate" => Ok(Self::Truncate),
            "rnu" | "nearest_up" | "round" => Ok(Self::NearestUp),
            "rne" | "nearest_even" | "convergent" => Ok(Self::NearestEven),
            _ => Err(FxpError::Parse(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OverflowMode {
    /// Modular reduction into the representable range.
    Wrap,
    /// Clamp to the nearest bound.
    Saturate,
}

impl OverflowMode {
    pub const ALL: [OverflowMode; 2] = [Self::Wrap, Self::Saturate];

    pub fn short_name(self) -> &'static str {
        match self {
            Self::Wrap => "wrap",
            Self::Saturate => "sat",
        }
    }
}

impl FromStr for OverflowMode {
    type Err = FxpError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "wrap" => Ok(Self::Wrap),
            "sat" | "saturate" => Ok(Self::Saturate),
            _ => Err(FxpError::Parse(s.to_string())),
        }
    }
}

/// A fixed-point number: `raw · 2^-n` in format `fmt`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FxPValue {
    raw: i128,
    fmt: QFormat,
}

impl FxPValue {
    pub fn new(raw: i128, fmt: QFormat) -> Result<Self, FxpError> {
        let (lo, hi) = fmt.raw_bounds();
        if raw < lo || raw > hi {
            return Err(FxpError::RawOutOfRange { raw, fmt });
        }
        Ok(Self { raw, fmt })
    }

    pub(crate) fn new_unchecked(raw: i128, fmt: QFormat) -> Self {
        debug_assert!({
            let (lo, hi) = fmt.raw_bounds();
            raw >= lo && raw <= hi
        });
        Self { raw, fmt }
    }

    pub fn zero(fmt: QFormat) -> Self {
        Self { raw: 0, fmt }
    }

    pub fn raw(&self) -> i128 {
        self.raw
    }

    pub fn format(&self) -> QFormat {
        self.fmt
    }

    pub fn to_rational(&self) -> Rational {
        decode(self)
    }

    /// Nearest `f64`; exact whenever the raw value has at most 53 significant bits.
    pub fn to_f64(&self) -> f64 {
        (self.raw as f64) * 2f64.powi(-self.fmt.n)
    }
}

/// Textual form `raw@Qm.n`.
impl fmt::Display for FxPValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@{}", self.raw, self.fmt)
    }
}

impl FromStr for FxPValue {
    type Err = FxpError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (raw, fmt) = s.split_once('@').ok_or_else(|| FxpError::Parse(s.to_string()))?;
        let raw: i128 = raw.trim().parse().map_err(|_| FxpError::Parse(s.to_string()))?;
        FxPValue::new(raw, fmt.trim().parse()?)
    }
}

/// Result of an operation that may have triggered overflow handling.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Quantized {
    pub value: FxPValue,
    pub overflow: bool,
}
