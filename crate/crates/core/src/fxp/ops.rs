use num_bigint::BigInt;

use super::{FxPValue, FxpError, OverflowMode, QFormat, Quantized, RoundingModeFxp};
use crate::rational::scale_pow2;
use crate::wide::{fit, round_scaled, with_wide, WideInt};
use crate::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AddSub {
    Add,
    Sub,
}

/// Representable interval `[−2^(m−1), 2^(m−1) − 2^−n]` of a format.
pub fn range_of(fmt: QFormat) -> (Rational, Rational) {
    fmt.range()
}

pub fn decode(v: &FxPValue) -> Rational {
    scale_pow2(&Rational::from_integer(BigInt::from(v.raw)), -(v.fmt.n as i64))
}

/// Encodes an exact real: round `x / q` on the format grid, then handle overflow.
pub fn encode(x: &Rational, fmt: QFormat, r: RoundingModeFxp, o: OverflowMode) -> Quantized {
    let v = round_scaled(x.numer().clone(), x.denom().clone(), fmt.n as i64, r)
        .expect("arbitrary-precision path cannot overflow");
    let (raw, overflow) = fit(v, fmt, o).expect("arbitrary-precision path cannot overflow");
    Quantized { value: FxPValue::new_unchecked(raw, fmt), overflow }
}

fn encode_f64_w<W: WideInt>(
    mant: i128,
    exp: i64,
    fmt: QFormat,
    r: RoundingModeFxp,
    o: OverflowMode,
) -> Option<(i128, bool)> {
    let v = round_scaled(W::from(mant), W::one(), exp + fmt.n as i64, r)?;
    fit(v, fmt, o)
}

/// Encodes a finite `f64` exactly (the binary value of the double is used).
///
/// # Panics
/// Panics on NaN or infinities.
pub fn encode_f64(x: f64, fmt: QFormat, r: RoundingModeFxp, o: OverflowMode) -> Quantized {
    assert!(x.is_finite(), "cannot encode non-finite value {x}");
    if x == 0.0 {
        return Quantized { value: FxPValue::zero(fmt), overflow: false };
    }
    let bits = x.to_bits();
    let sign = if bits >> 63 == 1 { -1i128 } else { 1 };
    let biased = ((bits >> 52) & 0x7ff) as i64;
    let frac = (bits & ((1u64 << 52) - 1)) as i128;
    let (mant, exp) = if biased == 0 { (frac, -1074) } else { (frac | (1i128 << 52), biased - 1075) };
    let (raw, overflow) = with_wide!(encode_f64_w(sign * mant, exp, fmt, r, o));
    Quantized { value: FxPValue::new_unchecked(raw, fmt), overflow }
}

fn convert_w<W: WideInt>(v: FxPValue, fmt: QFormat, r: RoundingModeFxp, o: OverflowMode) -> Option<(i128, bool)> {
    let x = round_scaled(W::from(v.raw), W::one(), fmt.n as i64 - v.fmt.n as i64, r)?;
    fit(x, fmt, o)
}

/// Re-expresses a value in another format (extending or discarding bits).
pub fn convert(v: &FxPValue, fmt: QFormat, r: RoundingModeFxp, o: OverflowMode) -> Quantized {
    let (raw, overflow) = with_wide!(convert_w(*v, fmt, r, o));
    Quantized { value: FxPValue::new_unchecked(raw, fmt), overflow }
}

/// Discards `n − n_target` fractional bits.
///
/// The integer word-length is kept, so a rounding carry out of the top
/// (e.g. `NearestUp` on the largest value) is resolved by `o`.
pub fn quantize(v: &FxPValue, n_target: i32, r: RoundingModeFxp, o: OverflowMode) -> Result<Quantized, FxpError> {
    if n_target > v.fmt.n {
        return Err(FxpError::PrecisionIncrease { from: v.fmt.n, to: n_target });
    }
    let fmt = QFormat { n: n_target, ..v.fmt };
    let fmt = if fmt.signed { QFormat::new(fmt.m, fmt.n)? } else { QFormat::unsigned(fmt.m, fmt.n)? };
    Ok(convert(v, fmt, r, o))
}

/// Output format of an operation given its input formats.
///
/// For addition and subtraction `mz_hint` is the output IWL known from range
/// analysis; without it one extra integer bit is allocated.
pub fn propagate_format(op: ArithOp, fx: QFormat, fy: QFormat, mz_hint: Option<i32>) -> Result<QFormat, FxpError> {
    let signed = fx.signed || fy.signed;
    let (m, n, signed) = match op {
        ArithOp::Add | ArithOp::Sub => {
            let mz = mz_hint.unwrap_or(fx.m.max(fy.m) + 1);
            let mc = fx.m.max(fy.m).max(mz);
            (mc, fx.n.max(fy.n), signed || op == ArithOp::Sub)
        }
        ArithOp::Mul => (fx.m + fy.m, fx.n + fy.n, signed),
        ArithOp::Div => (fx.m + fy.n, fx.n + fy.m, signed),
    };
    if signed {
        QFormat::new(m, n)
    } else {
        QFormat::unsigned(m, n)
    }
}

fn add_sub_w<W: WideInt>(
    x: FxPValue,
    y: FxPValue,
    op: AddSub,
    out: QFormat,
    r: RoundingModeFxp,
    o: OverflowMode,
) -> Option<(i128, bool)> {
    // align both binary points on the finer grid
    let n = x.fmt.n.max(y.fmt.n);
    let a = W::from(x.raw).checked_shl((n - x.fmt.n) as u64)?;
    let b = W::from(y.raw).checked_shl((n - y.fmt.n) as u64)?;
    let s = match op {
        AddSub::Add => a.checked_add(&b)?,
        AddSub::Sub => a.checked_sub(&b)?,
    };
    let v = round_scaled(s, W::one(), out.n as i64 - n as i64, r)?;
    fit(v, out, o)
}

/// Exact sum or difference, then rounding and overflow handling into `out`.
pub fn fxp_add_sub(
    x: &FxPValue,
    y: &FxPValue,
    op: AddSub,
    out: QFormat,
    r: RoundingModeFxp,
    o: OverflowMode,
) -> Quantized {
    let (raw, overflow) = with_wide!(add_sub_w(*x, *y, op, out, r, o));
    Quantized { value: FxPValue::new_unchecked(raw, out), overflow }
}

pub fn fxp_add(x: &FxPValue, y: &FxPValue, out: QFormat, r: RoundingModeFxp, o: OverflowMode) -> Quantized {
    fxp_add_sub(x, y, AddSub::Add, out, r, o)
}

pub fn fxp_sub(x: &FxPValue, y: &FxPValue, out: QFormat, r: RoundingModeFxp, o: OverflowMode) -> Quantized {
    fxp_add_sub(x, y, AddSub::Sub, out, r, o)
}

fn mul_w<W: WideInt>(
    x: FxPValue,
    y: FxPValue,
    out: QFormat,
    r: RoundingModeFxp,
    o: OverflowMode,
) -> Option<(i128, bool)> {
    let p = W::from(x.raw).checked_mul(&W::from(y.raw))?;
    let n = x.fmt.n as i64 + y.fmt.n as i64;
    let v = round_scaled(p, W::one(), out.n as i64 - n, r)?;
    fit(v, out, o)
}

/// Full-width product in `Q(mx+my).(nx+ny)`; never overflows.
pub fn fxp_mul(x: &FxPValue, y: &FxPValue) -> Result<FxPValue, FxpError> {
    let out = propagate_format(ArithOp::Mul, x.fmt, y.fmt, None)?;
    let q = fxp_mul_into(x, y, out, RoundingModeFxp::Truncate, OverflowMode::Wrap);
    debug_assert!(!q.overflow);
    Ok(q.value)
}

/// Exact product rounded and overflow-handled into `out`.
pub fn fxp_mul_into(x: &FxPValue, y: &FxPValue, out: QFormat, r: RoundingModeFxp, o: OverflowMode) -> Quantized {
    let (raw, overflow) = with_wide!(mul_w(*x, *y, out, r, o));
    Quantized { value: FxPValue::new_unchecked(raw, out), overflow }
}

fn div_w<W: WideInt>(
    x: FxPValue,
    y: FxPValue,
    out: QFormat,
    r: RoundingModeFxp,
    o: OverflowMode,
) -> Option<(i128, bool)> {
    // x / y · 2^nout = (x.raw / y.raw) · 2^(ny − nx + nout)
    let shift = y.fmt.n as i64 - x.fmt.n as i64 + out.n as i64;
    let v = round_scaled(W::from(x.raw), W::from(y.raw), shift, r)?;
    fit(v, out, o)
}

/// Quotient floored into `Q(mx+ny).(nx+my)`.
pub fn fxp_div(x: &FxPValue, y: &FxPValue) -> Result<FxPValue, FxpError> {
    let out = propagate_format(ArithOp::Div, x.fmt, y.fmt, None)?;
    let q = fxp_div_into(x, y, out, RoundingModeFxp::Truncate, OverflowMode::Wrap)?;
    debug_assert!(!q.overflow);
    Ok(q.value)
}

/// Exact quotient rounded and overflow-handled into `out`.
pub fn fxp_div_into(
    x: &FxPValue,
    y: &FxPValue,
    out: QFormat,
    r: RoundingModeFxp,
    o: OverflowMode,
) -> Result<Quantized, FxpError> {
    if y.raw == 0 {
        return Err(FxpError::DivisionByZero);
    }
    let (raw, overflow) = with_wide!(div_w(*x, *y, out, r, o));
    Ok(Quantized { value: FxPValue::new_unchecked(raw, out), overflow })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::parse_rational;
    use RoundingModeFxp::*;

    fn f(s: &str) -> QFormat {
        s.parse().unwrap()
    }

    fn q(s: &str) -> Rational {
        parse_rational(s).unwrap()
    }

    fn val(x: &str, fmt: &str) -> FxPValue {
        let e = encode(&q(x), f(fmt), NearestEven, OverflowMode::Wrap);
        assert!(!e.overflow);
        assert_eq!(decode(&e.value), q(x), "{x} not representable in {fmt}");
        e.value
    }

    #[test]
    fn range_examples() {
        assert_eq!(range_of(f("Q4.0")), (q("-8"), q("7")));
        assert_eq!(range_of(f("Q1.3")), (q("-1"), q("0.875")));
        assert_eq!(range_of(f("Q16.16")), (q("-32768"), q("32767.9999847412109375")));
        assert_eq!(range_of(f("uQ2.2")), (q("0"), q("3.75")));
    }

    #[test]
    fn encode_examples() {
        let e = encode(&q("0.875"), f("Q1.1"), Truncate, OverflowMode::Wrap);
        assert_eq!((e.value.raw(), decode(&e.value)), (1, q("0.5")));
        for r in RoundingModeFxp::ALL {
            let s = encode(&q("9"), f("Q4.0"), r, OverflowMode::Saturate);
            assert_eq!(s.value.raw(), 7);
            assert!(s.overflow);
            let w = encode(&q("9"), f("Q4.0"), r, OverflowMode::Wrap);
            assert_eq!(w.value.raw(), -7);
        }
    }

    #[test]
    fn decode_examples() {
        assert_eq!(decode(&FxPValue::new(1, f("Q1.3")).unwrap()), q("0.125"));
        assert_eq!(decode(&FxPValue::new(-8, f("Q4.0")).unwrap()), q("-8"));
        assert_eq!(decode(&FxPValue::new(5, f("Q2.6")).unwrap()), q("0.078125"));
        assert!(FxPValue::new(8, f("Q4.0")).is_err());
    }

    #[test]
    fn quantize_examples() {
        let v = val("0.75", "Q2.3");
        let up = quantize(&v, 1, NearestUp, OverflowMode::Saturate).unwrap();
        assert_eq!(decode(&up.value), q("1"));
        let even = quantize(&v, 1, NearestEven, OverflowMode::Saturate).unwrap();
        assert_eq!(decode(&even.value), q("1"));
        let low = quantize(&val("0.25", "Q2.3"), 1, NearestEven, OverflowMode::Saturate).unwrap();
        assert_eq!(decode(&low.value), q("0"));
        assert!(matches!(quantize(&v, 4, Truncate, OverflowMode::Wrap), Err(FxpError::PrecisionIncrease { .. })));
    }

    #[test]
    fn quantize_carry_uses_overflow_mode() {
        // 0.875 in Q1.3 rounds up to 1.0, which Q1.1 cannot hold
        let v = val("0.875", "Q1.3");
        let sat = quantize(&v, 1, NearestUp, OverflowMode::Saturate).unwrap();
        assert!(sat.overflow);
        assert_eq!(decode(&sat.value), q("0.5"));
        let wrap = quantize(&v, 1, NearestUp, OverflowMode::Wrap).unwrap();
        assert_eq!(decode(&wrap.value), q("-1"));
    }

    #[test]
    fn propagation_examples() {
        assert_eq!(propagate_format(ArithOp::Mul, f("Q2.3"), f("Q1.4"), None).unwrap(), f("Q3.7"));
        assert_eq!(propagate_format(ArithOp::Div, f("Q2.3"), f("Q1.4"), None).unwrap(), f("Q6.4"));
        assert_eq!(propagate_format(ArithOp::Add, f("Q2.3"), f("Q4.1"), Some(5)).unwrap(), f("Q5.3"));
        assert_eq!(propagate_format(ArithOp::Add, f("Q2.3"), f("Q4.1"), None).unwrap(), f("Q5.3"));
        assert_eq!(propagate_format(ArithOp::Sub, f("Q2.3"), f("Q2.1"), Some(1)).unwrap(), f("Q2.3"));
    }

    #[test]
    fn add_sub_examples() {
        let half = val("0.5", "Q1.1");
        let s = fxp_add(&half, &half, f("Q2.1"), Truncate, OverflowMode::Wrap);
        assert_eq!(decode(&s.value), q("1"));
        let a = val("0.875", "Q1.3");
        let w = fxp_add(&a, &a, f("Q1.3"), Truncate, OverflowMode::Wrap);
        assert_eq!(decode(&w.value), q("-0.25"));
        assert!(w.overflow);
        let s = fxp_add(&a, &a, f("Q1.3"), Truncate, OverflowMode::Saturate);
        assert_eq!(decode(&s.value), q("0.875"));
        let d = fxp_sub(&val("-1", "Q1.3"), &a, f("Q2.3"), Truncate, OverflowMode::Wrap);
        assert_eq!(decode(&d.value), q("-1.875"));
    }

    #[test]
    fn mul_examples() {
        let half = val("0.5", "Q1.1");
        let p = fxp_mul(&half, &half).unwrap();
        assert_eq!((decode(&p), p.format()), (q("0.25"), f("Q2.2")));
        let m1 = val("-1", "Q1.3");
        let p = fxp_mul(&m1, &m1).unwrap();
        assert_eq!((decode(&p), p.format()), (q("1"), f("Q2.6")));
        let p = fxp_mul(&val("0.625", "Q1.3"), &val("-0.375", "Q1.3")).unwrap();
        assert_eq!(decode(&p), q("-0.234375"));
    }

    #[test]
    fn div_examples() {
        let d = fxp_div(&val("-2", "Q2.2"), &val("0.25", "Q2.2")).unwrap();
        assert_eq!((decode(&d), d.format()), (q("-8"), f("Q4.4")));
        let d = fxp_div(&val("0.25", "Q2.2"), &val("-2", "Q2.2")).unwrap();
        assert_eq!(decode(&d), q("-0.125"));
        let d = fxp_div(&val("1.5", "Q2.2"), &val("0.75", "Q2.2")).unwrap();
        assert_eq!(decode(&d), q("2"));
        // floor: 1 / 3 in Q4.4 → 0.3125
        let d = fxp_div(&val("0.25", "Q2.2"), &val("0.75", "Q2.2")).unwrap();
        assert_eq!(decode(&d), q("0.3125"));
        assert_eq!(fxp_div(&val("1", "Q2.2"), &FxPValue::zero(f("Q2.2"))), Err(FxpError::DivisionByZero));
    }

    #[test]
    fn encode_f64_matches_rational_path() {
        let fmt = f("Q3.5");
        for &x in &[0.0, 1.0, -1.0, 0.03125, std::f64::consts::SQRT_2, -2.999, 7.9, -9.5, 1e-30, -1e-30, 3.0e10] {
            for r in RoundingModeFxp::ALL {
                for o in OverflowMode::ALL {
                    let a = encode_f64(x, fmt, r, o);
                    let b = encode(&Rational::from_float(x).unwrap(), fmt, r, o);
                    assert_eq!(a, b, "x={x} r={r:?} o={o:?}");
                }
            }
        }
    }

    #[test]
    fn wide_formats_take_the_bigint_path() {
        let x = FxPValue::new(i64::MAX as i128, f("Q1.63")).unwrap();
        let y = FxPValue::new(3, f("Q60.-50")).unwrap();
        // alignment needs a 113-bit shift of a 63-bit value
        let s = fxp_add(&x, &y, f("Q64.0"), NearestEven, OverflowMode::Wrap);
        let exact = decode(&x) + decode(&y);
        assert_eq!(s.value, encode(&exact, f("Q64.0"), NearestEven, OverflowMode::Wrap).value);
        assert!(!s.overflow);
    }
}
