use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{FxpError, MAX_WIDTH};
use crate::rational::pow2;
use crate::Rational;

/// Fixed-point format `Qm.n` (signed) or `uQm.n` (unsigned).
///
/// `m` is the integer word-length (including the sign bit when signed) and
/// `n` the fractional word-length. Either may be zero or negative as long as
/// the total width `m + n` is at least one bit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct QFormat {
    pub m: i32,
    pub n: i32,
    pub signed: bool,
}

impl QFormat {
    pub fn new(m: i32, n: i32) -> Result<Self, FxpError> {
        Self::with_sign(m, n, true)
    }

    pub fn unsigned(m: i32, n: i32) -> Result<Self, FxpError> {
        Self::with_sign(m, n, false)
    }

    fn with_sign(m: i32, n: i32, signed: bool) -> Result<Self, FxpError> {
        let max = if signed { MAX_WIDTH } else { MAX_WIDTH - 1 };
        let w = m.checked_add(n);
        match w {
            Some(w) if (1..=max).contains(&w) && n.abs() <= 1 << 16 => Ok(Self { m, n, signed }),
            _ => Err(FxpError::InvalidFormat { m, n, max }),
        }
    }

    pub fn width(&self) -> i32 {
        self.m + self.n
    }

    /// Quantization step `q = 2^-n`.
    pub fn step(&self) -> Rational {
        pow2(-(self.n as i64))
    }

    /// Smallest and largest representable values.
    pub fn range(&self) -> (Rational, Rational) {
        if self.signed {
            let hi = pow2(self.m as i64 - 1);
            (-hi.clone(), hi - self.step())
        } else {
            (Rational::from_integer(0.into()), pow2(self.m as i64) - self.step())
        }
    }

    pub fn raw_bounds(&self) -> (i128, i128) {
        let w = self.width() as u32;
        if self.signed {
            if w == 128 {
                (i128::MIN, i128::MAX)
            } else {
                (-(1i128 << (w - 1)), (1i128 << (w - 1)) - 1)
            }
        } else {
            (0, (1i128 << w) - 1)
        }
    }

    pub fn contains(&self, x: &Rational) -> bool {
        let (lo, hi) = self.range();
        *x >= lo && *x <= hi
    }
}

impl fmt::Display for QFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prefix = if self.signed { "Q" } else { "uQ" };
        write!(f, "{prefix}{}.{}", self.m, self.n)
    }
}

impl FromStr for QFormat {
    type Err = FxpError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || FxpError::Parse(s.to_string());
        let t = s.trim();
        let (signed, body) = if let Some(b) = t.strip_prefix("uQ") {
            (false, b)
        } else if let Some(b) = t.strip_prefix('Q') {
            (true, b)
        } else {
            return Err(err());
        };
        let (m, n) = body.split_once('.').ok_or_else(err)?;
        let m: i32 = m.parse().map_err(|_| err())?;
        let n: i32 = n.parse().map_err(|_| err())?;
        Self::with_sign(m, n, signed)
    }
}

impl Serialize for QFormat {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for QFormat {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn notation_round_trips() {
        for s in ["Q4.0", "Q1.3", "uQ8.8", "Q-2.6", "Q5.-1"] {
            let f: QFormat = s.parse().unwrap();
            assert_eq!(f.to_string(), s);
        }
        assert!("Q0.0".parse::<QFormat>().is_err());
        assert!("Q3".parse::<QFormat>().is_err());
        assert!("P3.4".parse::<QFormat>().is_err());
        assert!("Q100.100".parse::<QFormat>().is_err());
    }

    #[test]
    fn raw_bounds_match_range() {
        let f = QFormat::new(2, 3).unwrap();
        assert_eq!(f.raw_bounds(), (-16, 15));
        let u = QFormat::unsigned(2, 3).unwrap();
        assert_eq!(u.raw_bounds(), (0, 31));
        let wide = QFormat::new(64, 64).unwrap();
        assert_eq!(wide.raw_bounds(), (i128::MIN, i128::MAX));
    }
}
