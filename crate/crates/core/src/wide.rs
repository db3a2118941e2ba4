//! Integer rounding primitives, generic over the working integer.
//!
//! Every fixed-point operation is expressed as "round `num / den · 2^shift`
//! to an integer, then fit it into `w` bits". The computation is first tried
//! in `i128` with checked arithmetic and replayed on `BigInt` only when an
//! intermediate does not fit, so results are exact for every format.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{CheckedAdd, CheckedMul, CheckedSub, One, Signed, ToPrimitive};

use crate::fxp::{OverflowMode, QFormat, RoundingModeFxp};

pub(crate) trait WideInt:
    Clone + Ord + Integer + Signed + CheckedAdd + CheckedSub + CheckedMul + From<i128> + ToPrimitive
{
    fn checked_pow2(k: u64) -> Option<Self>;

    fn checked_shl(&self, k: u64) -> Option<Self> {
        self.checked_mul(&Self::checked_pow2(k)?)
    }

    /// Rounds `self / 2^k`.
    fn round_shr(&self, k: u64, mode: RoundingModeFxp) -> Option<Self> {
        round_ratio(self, &Self::checked_pow2(k)?, mode)
    }
}

impl WideInt for i128 {
    fn checked_pow2(k: u64) -> Option<Self> {
        (k <= 126).then(|| 1i128 << k)
    }

    fn round_shr(&self, k: u64, mode: RoundingModeFxp) -> Option<Self> {
        if k == 0 {
            return Some(*self);
        }
        if k > 125 {
            return round_ratio(self, &Self::checked_pow2(k)?, mode);
        }
        let q = self >> k;
        let rem = self & ((1i128 << k) - 1);
        let half = 1i128 << (k - 1);
        let up = match mode {
            RoundingModeFxp::Truncate => false,
            RoundingModeFxp::NearestUp => rem >= half,
            RoundingModeFxp::NearestEven => rem > half || (rem == half && q & 1 == 1),
        };
        Some(if up { q + 1 } else { q })
    }
}

impl WideInt for BigInt {
    fn checked_pow2(k: u64) -> Option<Self> {
        Some(BigInt::one() << k)
    }
}

/// Rounds `num / den` (with `den > 0`) to an integer.
pub(crate) fn round_ratio<W: WideInt>(num: &W, den: &W, mode: RoundingModeFxp) -> Option<W> {
    debug_assert!(den.is_positive());
    let (q, r) = num.div_mod_floor(den);
    if r.is_zero() {
        return Some(q);
    }
    let twice_r = r.checked_add(&r)?;
    let up = match mode {
        RoundingModeFxp::Truncate => false,
        RoundingModeFxp::NearestUp => twice_r >= *den,
        RoundingModeFxp::NearestEven => match twice_r.cmp(den) {
            std::cmp::Ordering::Greater => true,
            std::cmp::Ordering::Less => false,
            std::cmp::Ordering::Equal => q.is_odd(),
        },
    };
    if up {
        q.checked_add(&W::one())
    } else {
        Some(q)
    }
}

/// Rounds `num / den · 2^shift` to an integer; `den` may have either sign.
pub(crate) fn round_scaled<W: WideInt>(num: W, den: W, shift: i64, mode: RoundingModeFxp) -> Option<W> {
    assert!(!den.is_zero(), "zero denominator");
    let (mut num, mut den) =
        if den.is_negative() { (W::zero().checked_sub(&num)?, W::zero().checked_sub(&den)?) } else { (num, den) };
    if shift >= 0 {
        num = num.checked_shl(shift as u64)?;
    } else if den.is_one() {
        return num.round_shr(shift.unsigned_abs(), mode);
    } else {
        den = den.checked_shl(shift.unsigned_abs())?;
    }
    round_ratio(&num, &den, mode)
}

/// Inclusive raw-integer bounds of a format.
pub(crate) fn raw_bounds<W: WideInt>(fmt: QFormat) -> Option<(W, W)> {
    let w = fmt.width() as u64;
    if fmt.signed {
        let half = W::checked_pow2(w - 1)?;
        let hi = half.checked_sub(&W::one())?;
        Some((-half, hi))
    } else {
        let full = W::checked_pow2(w)?;
        Some((W::zero(), full.checked_sub(&W::one())?))
    }
}

/// Fits an integer into the format's raw range; returns the raw value and
/// whether overflow handling fired.
pub(crate) fn fit<W: WideInt>(v: W, fmt: QFormat, mode: OverflowMode) -> Option<(i128, bool)> {
    // None: bounds exceed W, so the BigInt path redoes the operation
    let (lo, hi) = raw_bounds::<W>(fmt)?;
    if v >= lo && v <= hi {
        return Some((v.to_i128()?, false));
    }
    let out = match mode {
        OverflowMode::Saturate => {
            if v < lo {
                lo
            } else {
                hi
            }
        }
        OverflowMode::Wrap => {
            let modulus = W::checked_pow2(fmt.width() as u64)?;
            let shifted = v.checked_sub(&lo)?;
            lo.checked_add(&shifted.mod_floor(&modulus))?
        }
    };
    Some((out.to_i128()?, true))
}

/// Runs a computation on `i128`, falling back to `BigInt` on overflow.
macro_rules! with_wide {
    ($f:ident ( $($arg:expr),* $(,)? )) => {
        match $f::<i128>($($arg),*) {
            Some(v) => v,
            None => $f::<num_bigint::BigInt>($($arg),*)
                .expect("arbitrary-precision path cannot overflow"),
        }
    };
}
pub(crate) use with_wide;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ratio_rounding_modes() {
        use RoundingModeFxp::*;
        // 5/2 = 2.5
        assert_eq!(round_ratio(&5i128, &2, Truncate), Some(2));
        assert_eq!(round_ratio(&5i128, &2, NearestUp), Some(3));
        assert_eq!(round_ratio(&5i128, &2, NearestEven), Some(2));
        // -5/2 = -2.5
        assert_eq!(round_ratio(&-5i128, &2, Truncate), Some(-3));
        assert_eq!(round_ratio(&-5i128, &2, NearestUp), Some(-2));
        assert_eq!(round_ratio(&-5i128, &2, NearestEven), Some(-2));
        assert_eq!(round_ratio(&-7i128, &2, NearestEven), Some(-4));
    }

    #[test]
    fn i128_and_bigint_agree() {
        let modes = [RoundingModeFxp::Truncate, RoundingModeFxp::NearestUp, RoundingModeFxp::NearestEven];
        for num in -40i128..40 {
            for den in [-7i128, -4, -1, 1, 3, 8] {
                for shift in -3i64..3 {
                    for m in modes {
                        let a = round_scaled(num, den, shift, m).unwrap();
                        let b = round_scaled(BigInt::from(num), BigInt::from(den), shift, m).unwrap();
                        assert_eq!(BigInt::from(a), b);
                    }
                }
            }
        }
    }

    #[test]
    fn i128_reports_overflow() {
        assert!(round_scaled(1i128 << 100, 1, 40, RoundingModeFxp::Truncate).is_none());
        let big = round_scaled(BigInt::from(1) << 100u32, BigInt::from(1), 40, RoundingModeFxp::Truncate);
        assert_eq!(big, Some(BigInt::from(1) << 140u32));
    }

    #[test]
    fn shift_fast_path_matches_division() {
        for v in [-1000i128, -17, -16, -9, -8, -7, -1, 0, 1, 7, 8, 9, 16, 17, 1000, i128::MAX, i128::MIN] {
            for k in [1u64, 2, 3, 4, 60, 125, 126, 127] {
                for m in RoundingModeFxp::ALL {
                    let slow = round_ratio(&BigInt::from(v), &(BigInt::from(1) << k), m);
                    // None defers to the BigInt path
                    if let Some(fast) = v.round_shr(k, m) {
                        assert_eq!(Some(BigInt::from(fast)), slow, "{v} >> {k} {m:?}");
                    }
                }
            }
        }
    }
}
