//! Floating-point operators.
//!
//! Addition and multiplication run on an integer datapath: operands are
//! unpacked into `u128` significands, aligned with a sticky bit, combined,
//! then normalized and rounded by [`round_pack`]. [`encode_real`] is an
//! independent exact-rational route used as the conformance oracle.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};

use super::{extremes, FlPFormat, FlPValue, FlpError, FlpRounding};
use crate::rational::{floor_log2, scale_pow2};
use crate::Rational;

/// Output format of a binary operation: widest exponent and mantissa.
pub fn output_format(f1: FlPFormat, f2: FlPFormat) -> Result<FlPFormat, FlpError> {
    if f1.rounding != f2.rounding {
        return Err(FlpError::MixedRounding);
    }
    let mut out = FlPFormat::new(f1.exp_bits.max(f2.exp_bits), f1.man_bits.max(f2.man_bits), f1.rounding)?;
    if !f1.has_default_bias() || !f2.has_default_bias() {
        if f1.bias != f2.bias {
            return Err(FlpError::BiasMismatch(f1.bias, f2.bias));
        }
        out.bias = f1.bias;
    }
    Ok(out)
}

/// Custom biases must agree across operands and result.
fn check_bias(x: FlPFormat, y: FlPFormat, out: FlPFormat) -> Result<(), FlpError> {
    let custom = [x, y, out].iter().any(|f| !f.has_default_bias());
    if custom {
        for f in [y, out] {
            if f.bias != x.bias {
                return Err(FlpError::BiasMismatch(x.bias, f.bias));
            }
        }
    }
    Ok(())
}

/// Correctly rounded, saturating encoding of an exact rational.
pub fn encode_real(x: &Rational, fmt: FlPFormat) -> FlPValue {
    if x.is_zero() {
        return FlPValue::zero(fmt);
    }
    let neg = x.is_negative();
    let a = x.abs();
    let ext = extremes(fmt);
    if a > ext.max_pos {
        return FlPValue::max_value(fmt, neg);
    }
    if a < ext.min_pos {
        return FlPValue::min_value(fmt, neg);
    }
    let m = fmt.man_bits as i64;
    let mut e = floor_log2(&a);
    // scaled lies in [2^M, 2^(M+1))
    let scaled = scale_pow2(&a, m - e);
    let (mut q, r) = scaled.numer().div_mod_floor(scaled.denom());
    let up = match fmt.rounding {
        FlpRounding::TowardZero => false,
        FlpRounding::Nearest => {
            let twice = &r * 2u32;
            match twice.cmp(scaled.denom()) {
                std::cmp::Ordering::Greater => true,
                std::cmp::Ordering::Less => false,
                std::cmp::Ordering::Equal => q.is_odd(),
            }
        }
    };
    if up {
        q += 1u32;
    }
    let hidden = BigInt::from(1u64) << fmt.man_bits;
    if q == &hidden << 1u32 {
        q = hidden.clone();
        e += 1;
    }
    let mant = (q - hidden).to_u64().expect("mantissa fits");
    let exp = (e + fmt.bias as i64) as u32;
    FlPValue::new_unchecked(neg, exp, mant, fmt)
}

/// Rounds `(−1)^neg · mag · 2^scale` (with `mag > 0`) into `fmt`.
///
/// Any sticky bit in `mag` must sit at least two positions below the
/// rounding position so that ties are detected exactly.
fn round_pack(neg: bool, mag: u128, scale: i32, fmt: FlPFormat) -> FlPValue {
    debug_assert!(mag != 0);
    let m = fmt.man_bits;
    let len = 128 - mag.leading_zeros() as i32;
    let e = len - 1 + scale;
    if e > fmt.emax() {
        return FlPValue::max_value(fmt, neg);
    }
    if e < fmt.emin() {
        return FlPValue::min_value(fmt, neg);
    }
    let shift = len - (m as i32 + 1);
    let (mut q, rem, half) = if shift > 0 {
        let s = shift as u32;
        (mag >> s, mag & ((1u128 << s) - 1), 1u128 << (s - 1))
    } else {
        (mag << (-shift) as u32, 0, 0)
    };
    let all_ones = (1u128 << (m + 1)) - 1;
    if e == fmt.emax() && q == all_ones && rem != 0 {
        return FlPValue::max_value(fmt, neg);
    }
    let up = match fmt.rounding {
        FlpRounding::TowardZero => false,
        FlpRounding::Nearest => rem > half || (rem == half && rem != 0 && q & 1 == 1),
    };
    let mut e = e;
    if up {
        q += 1;
        if q >> (m + 1) != 0 {
            q >>= 1;
            e += 1;
        }
    }
    let mant = (q as u64) & ((1u64 << m) - 1);
    FlPValue::new_unchecked(neg, (e + fmt.bias) as u32, mant, fmt)
}

pub(super) fn from_f64(x: f64, fmt: FlPFormat) -> FlPValue {
    assert!(x.is_finite(), "cannot encode non-finite {x}");
    if x == 0.0 {
        return FlPValue::zero(fmt);
    }
    let bits = x.to_bits();
    let neg = bits >> 63 == 1;
    let exp = ((bits >> 52) & 0x7ff) as i32;
    let frac = bits & ((1u64 << 52) - 1);
    let (mag, scale) = if exp == 0 { (frac, -1074) } else { (frac | (1u64 << 52), exp - 1075) };
    // keep two spare low bits so round_pack sees an exact tie
    round_pack(neg, (mag as u128) << 2, scale - 2, fmt)
}

/// Operand as `(neg, significand, lsb exponent)`; value = sig · 2^lsb.
fn unpack(v: &FlPValue) -> (bool, u128, i32) {
    (v.sign(), v.significand() as u128, v.exponent() - v.format().man_bits as i32)
}

// Leading significand bit position after normalization in the adder.
const TOP: i32 = 124;

/// Sum of two values rounded into `out`.
pub fn flp_add(x: &FlPValue, y: &FlPValue, out: FlPFormat) -> Result<FlPValue, FlpError> {
    check_bias(x.format(), y.format(), out)?;
    if x.format().rounding != y.format().rounding {
        return Err(FlpError::MixedRounding);
    }
    Ok(add_unchecked(x, y, out))
}

/// Difference of two values rounded into `out`.
pub fn flp_sub(x: &FlPValue, y: &FlPValue, out: FlPFormat) -> Result<FlPValue, FlpError> {
    flp_add(x, &y.neg(), out)
}

fn add_unchecked(x: &FlPValue, y: &FlPValue, out: FlPFormat) -> FlPValue {
    match (x.is_zero(), y.is_zero()) {
        (true, true) => return FlPValue::zero(out),
        (true, false) => return repack(y, out),
        (false, true) => return repack(x, out),
        _ => {}
    }
    // stage 1: order operands by exponent and take the difference
    let (a, b) = if x.exponent() >= y.exponent() { (x, y) } else { (y, x) };
    let d = (a.exponent() - b.exponent()) as u32;
    let effective_sub = a.sign() != b.sign();
    // stage 2: normalize both significands to a leading one at TOP
    let (a_neg, a_sig, _) = unpack(a);
    let (_, b_sig, _) = unpack(b);
    let a_mag = a_sig << (TOP as u32 - a.format().man_bits);
    let b_full = b_sig << (TOP as u32 - b.format().man_bits);
    let scale = a.exponent() - TOP;
    if effective_sub && d <= 1 {
        close_path(a_neg, a_mag, b_full >> d, scale, out)
    } else {
        far_path(a_neg, a_mag, align_sticky(b_full, d), effective_sub, scale, out)
    }
}

/// Right shift that ORs every discarded bit into the result's LSB.
fn align_sticky(v: u128, d: u32) -> u128 {
    if d == 0 {
        v
    } else if d >= 128 {
        (v != 0) as u128
    } else {
        let lost = v & ((1u128 << d) - 1);
        (v >> d) | (lost != 0) as u128
    }
}

/// Effective subtraction with exponent difference ≤ 1: alignment is exact
/// and the result may cancel massively, so normalization is left to
/// `round_pack`'s leading-one detection.
fn close_path(a_neg: bool, a_mag: u128, b_mag: u128, scale: i32, out: FlPFormat) -> FlPValue {
    let (neg, diff) = match a_mag.cmp(&b_mag) {
        std::cmp::Ordering::Equal => return FlPValue::zero(out),
        std::cmp::Ordering::Greater => (a_neg, a_mag - b_mag),
        std::cmp::Ordering::Less => (!a_neg, b_mag - a_mag),
    };
    round_pack(neg, diff, scale, out)
}

/// Addition, or subtraction with exponent difference ≥ 2: the result
/// moves by at most one binade, the sticky bit keeps rounding exact.
fn far_path(a_neg: bool, a_mag: u128, b_mag: u128, sub: bool, scale: i32, out: FlPFormat) -> FlPValue {
    let mag = if sub { a_mag - b_mag } else { a_mag + b_mag };
    round_pack(a_neg, mag, scale, out)
}

fn repack(v: &FlPValue, out: FlPFormat) -> FlPValue {
    let (neg, sig, lsb) = unpack(v);
    round_pack(neg, sig << 2, lsb - 2, out)
}

/// Product of two values rounded into `out`.
pub fn flp_mul(x: &FlPValue, y: &FlPValue, out: FlPFormat) -> Result<FlPValue, FlpError> {
    check_bias(x.format(), y.format(), out)?;
    if x.format().rounding != y.format().rounding {
        return Err(FlpError::MixedRounding);
    }
    if x.is_zero() || y.is_zero() {
        return Ok(FlPValue::zero(out));
    }
    let (xn, xs, xl) = unpack(x);
    let (yn, ys, yl) = unpack(y);
    // exact significand product; two spare low bits keep ties exact
    Ok(round_pack(xn != yn, (xs * ys) << 2, xl + yl - 2, out))
}

/// Result of [`shift_exponent`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Shifted {
    pub value: FlPValue,
    pub saturated: bool,
}

/// Scales by `2^delta` by moving the exponent; the mantissa is unchanged
/// unless the exponent leaves the field range, in which case the result
/// saturates and the flag is raised.
pub fn shift_exponent(x: &FlPValue, delta: i32) -> Shifted {
    let fmt = x.format();
    if x.is_zero() || delta == 0 {
        return Shifted { value: *x, saturated: false };
    }
    let e = x.biased_exp() as i64 + delta as i64;
    if e > fmt.max_biased_exp() as i64 {
        Shifted { value: FlPValue::max_value(fmt, x.sign()), saturated: true }
    } else if e < 1 {
        Shifted { value: FlPValue::min_value(fmt, x.sign()), saturated: true }
    } else {
        Shifted { value: FlPValue::new_unchecked(x.sign(), e as u32, x.mantissa(), fmt), saturated: false }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{parse_rational, pow2};

    fn half() -> FlPFormat {
        FlPFormat::new(5, 10, FlpRounding::Nearest).unwrap()
    }

    fn r(s: &str) -> Rational {
        parse_rational(s).unwrap()
    }

    fn enc(s: &str, f: FlPFormat) -> FlPValue {
        encode_real(&r(s), f)
    }

    #[test]
    fn output_format_examples() {
        let f = |e, m| FlPFormat::new(e, m, FlpRounding::Nearest).unwrap();
        assert_eq!(output_format(f(5, 11), f(8, 24)).unwrap(), f(8, 24));
        assert_eq!(output_format(f(5, 24), f(8, 11)).unwrap(), f(8, 24));
        assert_eq!(output_format(f(5, 10), f(5, 10)).unwrap(), f(5, 10));
        let rz = FlPFormat::new(5, 10, FlpRounding::TowardZero).unwrap();
        assert_eq!(output_format(f(5, 10), rz), Err(FlpError::MixedRounding));
    }

    #[test]
    fn encode_examples() {
        let one = enc("1", half());
        assert_eq!((one.sign(), one.biased_exp(), one.mantissa()), (false, 15, 0));
        let big = encode_real(&pow2(20), half());
        assert_eq!(big.decode(), (pow2(1) - pow2(-10)) * pow2(16));
        let tiny = encode_real(&pow2(-30), half());
        assert_eq!(tiny.decode(), pow2(-14));
        assert_eq!(encode_real(&-pow2(-30), half()).decode(), -pow2(-14));
        assert!(enc("0", half()).is_zero());
    }

    #[test]
    fn encode_rounds_ties_to_even_and_renormalizes() {
        let f = FlPFormat::new(4, 2, FlpRounding::Nearest).unwrap();
        // grid near 1: 1, 1.25, 1.5, 1.75, 2
        assert_eq!(enc("1.125", f).decode(), r("1"));
        assert_eq!(enc("1.375", f).decode(), r("1.5"));
        assert_eq!(enc("1.875", f).decode(), r("2"));
        let z = FlPFormat::new(4, 2, FlpRounding::TowardZero).unwrap();
        assert_eq!(enc("1.99", z).decode(), r("1.75"));
        assert_eq!(enc("-1.99", z).decode(), r("-1.75"));
    }

    #[test]
    fn add_examples() {
        let f = half();
        assert!(flp_add(&enc("1", f), &enc("-1", f), f).unwrap().is_zero());
        assert_eq!(flp_add(&enc("1.5", f), &enc("1.5", f), f).unwrap().decode(), r("3"));
        let x = encode_real(&(r("1") + pow2(-10)), f);
        assert_eq!(flp_add(&x, &enc("-1", f), f).unwrap().decode(), pow2(-10));
    }

    #[test]
    fn mul_examples() {
        let f = half();
        let x = encode_real(&(r("1.5") * pow2(2)), f);
        let y = encode_real(&(r("1.25") * pow2(-1)), f);
        assert_eq!(flp_mul(&x, &y, f).unwrap().decode(), r("3.75"));
        assert!(flp_mul(&x, &FlPValue::zero(f), f).unwrap().is_zero());
        let top = encode_real(&((pow2(1) - pow2(-10)) * pow2(15)), f);
        let sat = flp_mul(&top, &enc("2", f), f).unwrap();
        assert_eq!(sat, FlPValue::max_value(f, false));
    }

    #[test]
    fn shift_examples() {
        let f = half();
        let s = shift_exponent(&enc("1", f), 3);
        assert_eq!((s.value.decode(), s.saturated), (r("8"), false));
        let x = encode_real(&(r("1.5") * pow2(f.emax() as i64)), f);
        let s = shift_exponent(&x, 1);
        assert!(s.saturated);
        assert_eq!(s.value, FlPValue::max_value(f, false));
        assert_eq!(shift_exponent(&x, 0).value.to_bits(), x.to_bits());
    }

    #[test]
    fn bias_rules() {
        let f = half();
        let g = f.with_bias(10);
        assert!(matches!(flp_add(&enc("1", f), &enc("1", g), f), Err(FlpError::BiasMismatch(..))));
        assert!(flp_add(&enc("1", g), &enc("1", g), g).is_ok());
        assert!(output_format(f, g).is_err());
        assert_eq!(output_format(g, g).unwrap(), g);
    }

    #[test]
    fn from_f64_matches_oracle() {
        let f = FlPFormat::new(5, 3, FlpRounding::Nearest).unwrap();
        let z = FlPFormat::new(5, 3, FlpRounding::TowardZero).unwrap();
        let mut x = -70000.0f64;
        while x < 70000.0 {
            let exact = crate::rational::from_f64(x).unwrap();
            for fmt in [f, z] {
                assert_eq!(from_f64(x, fmt), encode_real(&exact, fmt), "x = {x}");
            }
            x += 0.37 + x.abs() * 0.013;
        }
        for x in [1.0625, 1.1875, -1.0625, 1e-300, -1e300, 5e-324] {
            let exact = crate::rational::from_f64(x).unwrap();
            assert_eq!(from_f64(x, f), encode_real(&exact, f), "x = {x}");
        }
    }

    #[test]
    fn mixed_width_add_uses_sticky() {
        let wide = FlPFormat::new(8, 20, FlpRounding::Nearest).unwrap();
        let narrow = FlPFormat::new(8, 4, FlpRounding::Nearest).unwrap();
        let cases = ["1", "-1.03125", "3.0000019073486328125", "-0.000000476837158203125", "1.0625", "-200"];
        for a in cases {
            for b in cases {
                let x = enc(a, wide);
                let y = enc(b, wide);
                let exact = x.decode() + y.decode();
                assert_eq!(flp_add(&x, &y, narrow).unwrap(), encode_real(&exact, narrow), "{a} + {b}");
            }
        }
    }
}
