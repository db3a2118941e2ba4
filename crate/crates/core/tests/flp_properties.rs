use precisionlab::flp::{encode_real, flp_add, flp_mul, flp_sub, shift_exponent, FlPFormat, FlPValue, FlpRounding};
use precisionlab::rational::pow2;
use precisionlab::Rational;
use proptest::prelude::*;

fn formats(max_e: u32, max_m: u32) -> Vec<FlPFormat> {
    let mut out = Vec::new();
    for e in 2..=max_e {
        for m in 1..=max_m {
            for r in [FlpRounding::Nearest, FlpRounding::TowardZero] {
                out.push(FlPFormat::new(e, m, r).unwrap());
            }
        }
    }
    out
}

#[test]
fn small_formats_are_correctly_rounded() {
    for fmt in formats(3, 3) {
        let vals: Vec<(FlPValue, Rational)> = FlPValue::enumerate(fmt).map(|v| (v, v.decode())).collect();
        for (x, xr) in &vals {
            for (y, yr) in &vals {
                assert_eq!(flp_add(x, y, fmt).unwrap(), encode_real(&(xr + yr), fmt), "{x} + {y}");
                assert_eq!(flp_sub(x, y, fmt).unwrap(), encode_real(&(xr - yr), fmt), "{x} - {y}");
                assert_eq!(flp_mul(x, y, fmt).unwrap(), encode_real(&(xr * yr), fmt), "{x} * {y}");
            }
        }
    }
}

#[test]
fn add_and_mul_commute() {
    for fmt in formats(3, 2) {
        let vals: Vec<FlPValue> = FlPValue::enumerate(fmt).collect();
        for x in &vals {
            for y in &vals {
                assert_eq!(flp_add(x, y, fmt), flp_add(y, x, fmt));
                assert_eq!(flp_mul(x, y, fmt), flp_mul(y, x, fmt));
            }
        }
    }
}

#[test]
fn error_bounds_on_in_range_results() {
    for fmt in formats(3, 3) {
        let ext = fmt.extremes();
        let vals: Vec<FlPValue> = FlPValue::enumerate(fmt).collect();
        for x in &vals {
            for y in &vals {
                let exact = x.decode() * y.decode();
                let mag = num_traits::Signed::abs(&exact);
                if mag < ext.min_pos || mag > ext.max_pos {
                    continue;
                }
                let got = flp_mul(x, y, fmt).unwrap();
                let e = precisionlab::rational::floor_log2(&mag);
                let ulp = pow2(e - fmt.man_bits as i64);
                let err = num_traits::Signed::abs(&(got.decode() - &exact));
                match fmt.rounding {
                    FlpRounding::Nearest => assert!(err * Rational::from_integer(2.into()) <= ulp),
                    FlpRounding::TowardZero => {
                        assert!(err < ulp);
                        assert!(num_traits::Signed::abs(&got.decode()) <= mag);
                    }
                }
            }
        }
    }
}

#[test]
fn encode_is_monotone() {
    for fmt in formats(3, 2) {
        let mut prev = None;
        // sweep a fine grid well beyond the format's extremes
        for k in -4000..=4000 {
            let x = Rational::new(k.into(), 64.into());
            let v = encode_real(&x, fmt).decode();
            if let Some(p) = prev {
                assert!(p <= v);
            }
            prev = Some(v);
        }
    }
}

#[test]
fn every_output_is_a_valid_encoding() {
    for fmt in formats(3, 3) {
        let vals: Vec<FlPValue> = FlPValue::enumerate(fmt).collect();
        for x in &vals {
            for y in &vals {
                for v in [flp_add(x, y, fmt).unwrap(), flp_mul(x, y, fmt).unwrap()] {
                    assert_eq!(FlPValue::from_bits(v.to_bits(), fmt).unwrap(), v);
                }
            }
        }
    }
}

proptest! {
    #[test]
    fn shift_round_trips(bits in 0u64..(1 << 12), d in -20i32..20) {
        let fmt = FlPFormat::new(5, 6, FlpRounding::Nearest).unwrap();
        let Ok(x) = FlPValue::from_bits(bits, fmt) else { return Ok(()); };
        let s = shift_exponent(&x, d);
        if !s.saturated {
            let back = shift_exponent(&s.value, -d);
            prop_assert!(!back.saturated);
            prop_assert_eq!(back.value, x);
            if !x.is_zero() {
                prop_assert_eq!(s.value.decode(), precisionlab::rational::scale_pow2(&x.decode(), d as i64));
            }
        }
    }

    #[test]
    fn wide_format_add_matches_oracle(a in -1e6f64..1e6, b in -1e6f64..1e6) {
        let fmt = FlPFormat::new(8, 23, FlpRounding::Nearest).unwrap();
        let x = FlPValue::from_f64(a, fmt);
        let y = FlPValue::from_f64(b, fmt);
        let exact = x.decode() + y.decode();
        prop_assert_eq!(flp_add(&x, &y, fmt).unwrap(), encode_real(&exact, fmt));
        // single precision with IEEE bias agrees with hardware f32 in the normal range
        let hw = (a as f32) + (b as f32);
        if hw != 0.0 && hw.abs() > f32::MIN_POSITIVE {
            prop_assert_eq!(flp_add(&x, &y, fmt).unwrap().to_f64(), hw as f64);
        }
    }

    #[test]
    fn wide_format_mul_matches_hardware(a in -1e3f64..1e3, b in -1e3f64..1e3) {
        let fmt = FlPFormat::new(8, 23, FlpRounding::Nearest).unwrap();
        let x = FlPValue::from_f64(a, fmt);
        let y = FlPValue::from_f64(b, fmt);
        let hw = (a as f32) * (b as f32);
        if hw.abs() > f32::MIN_POSITIVE {
            prop_assert_eq!(flp_mul(&x, &y, fmt).unwrap().to_f64(), hw as f64);
        }
    }
}
