//! Exhaustive operator sweeps against independent exact oracles, plus the
//! toy optimizer benchmark. Shared by the acceptance tests and the CLI.

use std::fmt;

use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::flp::{encode_real, flp_add, flp_mul, FlPFormat, FlPValue, FlpRounding};
use crate::fxp::{
    encode, fxp_add_sub, fxp_div_into, fxp_mul_into, AddSub, FxPValue, OverflowMode, QFormat, RoundingModeFxp,
};
use crate::graph::{ExprGraph, NodeKind};
use crate::interval::Interval;
use crate::rational::{floor_log2, pow2};
use crate::wlopt::{
    evaluate_cost, greedy_minimize, is_locally_minimal, CostModel, GraphMse, QualityConstraint, QualityOracle, Sizing,
    WordlengthVector,
};
use crate::Rational;

/// Outcome of one exhaustive comparison.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SweepReport {
    pub name: String,
    /// Operand pairs (or single operands) checked, over all ops and modes.
    pub pairs: u64,
    pub mismatches: u64,
    pub first_failure: Option<String>,
}

impl SweepReport {
    fn new(name: &str) -> Self {
        Self { name: name.to_string(), pairs: 0, mismatches: 0, first_failure: None }
    }

    fn check(&mut self, ok: bool, describe: impl FnOnce() -> String) {
        self.pairs += 1;
        if !ok {
            self.mismatches += 1;
            if self.first_failure.is_none() {
                self.first_failure = Some(describe());
            }
        }
    }

    pub fn passed(&self) -> bool {
        self.mismatches == 0 && self.pairs > 0
    }
}

impl fmt::Display for SweepReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {} mismatches / {} pairs", self.name, self.mismatches, self.pairs)?;
        if let Some(e) = &self.first_failure {
            write!(f, " (first: {e})")?;
        }
        Ok(())
    }
}

/// Signed formats of width `1..=max_width` with `-1 <= n <= w + 1`, and
/// unsigned formats of width `1..=max_width` with `0 <= n <= w`.
pub fn fxp_formats(max_width: i32) -> Vec<QFormat> {
    let mut out = Vec::new();
    for w in 1..=max_width {
        for n in -1..=w + 1 {
            out.push(QFormat::new(w - n, n).expect("small format"));
        }
        for n in 0..=w {
            out.push(QFormat::unsigned(w - n, n).expect("small format"));
        }
    }
    out
}

/// Rounds `num / den` (den > 0) to an integer.
fn round_ratio(num: i128, den: i128, r: RoundingModeFxp) -> i128 {
    let f = num.div_euclid(den);
    let twice_rem = 2 * num.rem_euclid(den);
    match r {
        RoundingModeFxp::Truncate => f,
        RoundingModeFxp::NearestUp => f + i128::from(twice_rem >= den),
        RoundingModeFxp::NearestEven => {
            if twice_rem > den || (twice_rem == den && f % 2 != 0) {
                f + 1
            } else {
                f
            }
        }
    }
}

/// Fits an integer raw value into `fmt`; returns `(raw, overflowed)`.
fn fit_raw(k: i128, fmt: QFormat, o: OverflowMode) -> (i128, bool) {
    let w = fmt.width() as u32;
    let (lo, hi) = if fmt.signed { (-(1i128 << (w - 1)), (1i128 << (w - 1)) - 1) } else { (0, (1i128 << w) - 1) };
    if (lo..=hi).contains(&k) {
        return (k, false);
    }
    let v = match o {
        OverflowMode::Saturate => k.clamp(lo, hi),
        OverflowMode::Wrap => (k - lo).rem_euclid(1i128 << w) + lo,
    };
    (v, true)
}

/// Raw result of `num / den · 2^n` rounded with `r` and fitted into `fmt`.
fn oracle_raw(num: i128, den: i128, fmt: QFormat, r: RoundingModeFxp, o: OverflowMode) -> (i128, bool) {
    let (num, den) = if den < 0 { (-num, -den) } else { (num, den) };
    let (num, den) = if fmt.n >= 0 { (num << fmt.n, den) } else { (num, den << -fmt.n) };
    fit_raw(round_ratio(num, den, r), fmt, o)
}

fn raws(fmt: QFormat) -> std::ops::RangeInclusive<i128> {
    let w = fmt.width() as u32;
    if fmt.signed {
        -(1i128 << (w - 1))..=(1i128 << (w - 1)) - 1
    } else {
        0..=(1i128 << w) - 1
    }
}

/// Raw result of `num · 2^e` rounded with `r` and fitted into `fmt`.
fn oracle_raw_pow2(num: i128, e: i32, fmt: QFormat, r: RoundingModeFxp, o: OverflowMode) -> (i128, bool) {
    let k = e + fmt.n;
    if k >= 0 {
        fit_raw(num << k, fmt, o)
    } else {
        fit_raw(round_ratio(num, 1i128 << -k, r), fmt, o)
    }
}

/// Every same-format operand pair of every format in [`fxp_formats`],
/// through add, sub, mul and div into that format, under every rounding and
/// overflow mode. The oracle works on exact integer numerators.
pub fn fxp_exhaustive(max_width: i32) -> SweepReport {
    let mut rep = SweepReport::new("fxp add/sub/mul/div");
    for fmt in fxp_formats(max_width) {
        // x = a·2^-n, y = b·2^-n
        for a in raws(fmt) {
            let x = FxPValue::new(a, fmt).expect("raw in range");
            for b in raws(fmt) {
                let y = FxPValue::new(b, fmt).expect("raw in range");
                for r in RoundingModeFxp::ALL {
                    for o in OverflowMode::ALL {
                        let cases = [("+", a + b, -fmt.n), ("-", a - b, -fmt.n), ("*", a * b, -2 * fmt.n)];
                        for (sym, num, e) in cases {
                            let got = match sym {
                                "+" => fxp_add_sub(&x, &y, AddSub::Add, fmt, r, o),
                                "-" => fxp_add_sub(&x, &y, AddSub::Sub, fmt, r, o),
                                _ => fxp_mul_into(&x, &y, fmt, r, o),
                            };
                            let want = oracle_raw_pow2(num, e, fmt, r, o);
                            rep.check((got.value.raw(), got.overflow) == want, || {
                                format!("{x} {sym} {y} in {fmt} {r:?}/{o:?}: got {} want {}", got.value.raw(), want.0)
                            });
                        }
                        let got = fxp_div_into(&x, &y, fmt, r, o);
                        let ok = if b == 0 {
                            got.is_err()
                        } else {
                            // x / y = a / b exactly
                            let want = oracle_raw(a, b, fmt, r, o);
                            got.as_ref().is_ok_and(|q| (q.value.raw(), q.overflow) == want)
                        };
                        rep.check(ok, || format!("{x} / {y} in {fmt} {r:?}/{o:?}: got {got:?}"));
                    }
                }
            }
        }
    }
    rep
}

/// `2^(e - M)` for the binade of `x` (nonzero).
fn ulp_of(x: &Rational, man_bits: u32) -> Rational {
    pow2(floor_log2(&x.abs()) - man_bits as i64)
}

/// Every value pair of every format with the given exponent and mantissa
/// widths, through add and mul under both rounding modes, compared with the
/// correctly rounded exact result. In-range results must also be within
/// half an ulp (nearest) or one ulp (toward zero).
pub fn flp_exhaustive(exp_bits: std::ops::RangeInclusive<u32>, man_bits: std::ops::RangeInclusive<u32>) -> SweepReport {
    let mut rep = SweepReport::new("flp add/mul");
    for e in exp_bits {
        for m in man_bits.clone() {
            for rnd in [FlpRounding::Nearest, FlpRounding::TowardZero] {
                let fmt = FlPFormat::new(e, m, rnd).expect("small format");
                let ext = fmt.extremes();
                let (min_pos, max_pos) = (ext.min_pos, ext.max_pos);
                let vals: Vec<(FlPValue, Rational)> = FlPValue::enumerate(fmt).map(|v| (v, v.decode())).collect();
                for (x, xr) in &vals {
                    for (y, yr) in &vals {
                        for (sym, exact) in [("+", xr + yr), ("*", xr * yr)] {
                            let got = if sym == "+" { flp_add(x, y, fmt) } else { flp_mul(x, y, fmt) };
                            let Ok(got) = got else {
                                rep.check(false, || format!("{x} {sym} {y}: {got:?}"));
                                continue;
                            };
                            let mut ok = got == encode_real(&exact, fmt);
                            let mag = exact.abs();
                            if ok && !exact.is_zero() && mag >= min_pos && mag <= max_pos {
                                let err = (got.decode() - &exact).abs();
                                let ulp = ulp_of(&exact, m);
                                ok = match rnd {
                                    FlpRounding::Nearest => err * Rational::from_integer(2.into()) <= ulp,
                                    FlpRounding::TowardZero => err < ulp,
                                };
                            }
                            rep.check(ok, || format!("{x} {sym} {y} in {fmt}: got {got}"));
                        }
                    }
                }
            }
        }
    }
    rep
}

/// Mean rounding error of dropping `d` bits, exhaustively over one format.
#[derive(Debug, Clone, PartialEq)]
pub struct BiasCase {
    pub format: QFormat,
    pub dropped: i32,
    pub rounding: RoundingModeFxp,
    pub mean_error: Rational,
    /// Step of the rounded format.
    pub step: Rational,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BiasReport {
    pub cases: Vec<BiasCase>,
    pub failures: Vec<String>,
}

impl BiasReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty() && !self.cases.is_empty()
    }
}

impl fmt::Display for BiasReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "rounding bias: {} failures / {} cases", self.failures.len(), self.cases.len())?;
        if let Some(e) = self.failures.first() {
            write!(f, " (first: {e})")?;
        }
        Ok(())
    }
}

/// For every signed format of width `w <= max_width` with `n` in `0..=w`
/// and every `d` in `1..=min(max_dropped, w - 1)`, rounds all values to
/// `n - d` fractional bits (one extra integer bit keeps results in range)
/// and checks the exact mean error: truncation `-(q/2)(1 - 2^-d)`, nearest
/// even `0`, nearest up strictly positive.
pub fn rounding_bias_sweep(max_width: i32, max_dropped: i32) -> BiasReport {
    let mut rep = BiasReport { cases: Vec::new(), failures: Vec::new() };
    let two = Rational::from_integer(2.into());
    for w in 2..=max_width {
        for n in 0..=w {
            let fmt = QFormat::new(w - n, n).expect("small format");
            for d in 1..=max_dropped.min(w - 1) {
                let out = QFormat::new(fmt.m + d + 1, fmt.n - d).expect("small format");
                let step = pow2(-(out.n as i64));
                for r in RoundingModeFxp::ALL {
                    let mut sum = Rational::zero();
                    let mut count = 0i64;
                    let mut overflowed = false;
                    for a in raws(fmt) {
                        let x = FxPValue::new(a, fmt).expect("raw in range").to_rational();
                        let q = encode(&x, out, r, OverflowMode::Wrap);
                        overflowed |= q.overflow;
                        sum += q.value.to_rational() - x;
                        count += 1;
                    }
                    let mean = sum / Rational::from_integer(count.into());
                    let expected_ok = match r {
                        RoundingModeFxp::Truncate => {
                            mean == -(&step / &two) * (Rational::from_integer(1.into()) - pow2(-(d as i64)))
                        }
                        RoundingModeFxp::NearestEven => mean.is_zero(),
                        RoundingModeFxp::NearestUp => mean.is_positive(),
                    };
                    if overflowed || !expected_ok {
                        rep.failures.push(format!("{fmt} drop {d} {r:?}: mean {mean}"));
                    }
                    rep.cases.push(BiasCase {
                        format: fmt,
                        dropped: d,
                        rounding: r,
                        mean_error: mean,
                        step: step.clone(),
                    });
                }
            }
        }
    }
    rep
}

/// A two-input graph with one operator and one output; inputs span
/// symmetric ranges below 3 in magnitude so integer word-lengths stay at
/// most 4.
pub fn toy_instance(rng: &mut impl Rng) -> ExprGraph {
    let mut g = ExprGraph::new();
    let input = |g: &mut ExprGraph, id: &str, rng: &mut dyn rand::RngCore| {
        let b = Rational::new(rng.random_range(1..=11).into(), 4.into());
        g.input(id, Interval::new(-b.clone(), b).expect("ordered")).expect("fresh id")
    };
    let x = input(&mut g, "x", rng);
    let y = input(&mut g, "y", rng);
    let kind = [NodeKind::Add, NodeKind::Sub, NodeKind::Mul][rng.random_range(0..3)];
    let z = g.op("z", kind, &[x, y]).expect("valid operands");
    g.output("out", z).expect("valid operand");
    g
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerReport {
    pub instances: usize,
    /// Greedy cost within 10% of the exhaustive optimum.
    pub within_tolerance: usize,
    /// Returned solutions that violate the bound or are not locally minimal.
    pub invalid: usize,
    pub worst_ratio: f64,
}

impl OptimizerReport {
    pub fn passed(&self) -> bool {
        self.invalid == 0 && self.within_tolerance * 10 >= self.instances * 9
    }
}

impl fmt::Display for OptimizerReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "optimizer: {}/{} within 10% of optimum, {} invalid, worst ratio {:.3}",
            self.within_tolerance, self.instances, self.invalid, self.worst_ratio
        )
    }
}

pub const TOY_MIN_WIDTH: i32 = 4;
pub const TOY_MAX_WIDTH: i32 = 12;

/// Greedy against exhaustive search on random toy instances over the width
/// box `{4..12}³`. Inputs cost one unit per bit on top of the default table.
/// Each bound `λ_max` is the MSE of a random uniform width scaled by a
/// random factor in `[0.5, 2)`, so the constraint binds at varied depths.
pub fn optimizer_benchmark(instances: usize, samples: usize, seed: u64) -> OptimizerReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cm = CostModel::with_input_registers();
    let (lo, hi) = ([TOY_MIN_WIDTH; 3], [TOY_MAX_WIDTH; 3]);
    let mut rep = OptimizerReport { instances, within_tolerance: 0, invalid: 0, worst_ratio: 1.0 };
    for _ in 0..instances {
        let g = toy_instance(&mut rng);
        let sizing = Sizing::new(&g).expect("toy graphs size");
        let iwl = sizing.eligible_iwl();
        let ranges = g.declared_input_ranges().expect("inputs have ranges");
        let xs: Vec<Vec<f64>> = (0..samples)
            .map(|_| {
                ranges
                    .iter()
                    .map(|r| {
                        let (a, b) = (crate::rational::to_f64(r.lo()), crate::rational::to_f64(r.hi()));
                        rng.random_range(a..=b)
                    })
                    .collect()
            })
            .collect();
        let oracle = GraphMse::new(sizing, &QualityConstraint::mse(0.0), xs).expect("mse oracle");
        let mut table = std::collections::HashMap::new();
        for a in TOY_MIN_WIDTH..=TOY_MAX_WIDTH {
            for b in TOY_MIN_WIDTH..=TOY_MAX_WIDTH {
                for c in TOY_MIN_WIDTH..=TOY_MAX_WIDTH {
                    let w = vec![a, b, c];
                    let q = oracle.degradation(&WordlengthVector(w.clone())).expect("simulation");
                    table.insert(w, q);
                }
            }
        }
        let u = rng.random_range(TOY_MIN_WIDTH + 1..TOY_MAX_WIDTH);
        let lambda_max = table[&vec![u; 3]] * rng.random_range(0.5..2.0);
        let cost = |w: &[i32]| evaluate_cost(&g, &WordlengthVector(w.to_vec()), &cm).expect("complete table");
        let best = table.iter().filter(|(_, &q)| q <= lambda_max).map(|(w, _)| cost(w)).fold(f64::INFINITY, f64::min);
        let quality = |w: &[i32]| Ok(table[w]);
        match greedy_minimize(&lo, &hi, &iwl, lambda_max, cost, quality) {
            Ok(res) => {
                let minimal = is_locally_minimal(&res.w.0, &lo, lambda_max, quality).unwrap_or(false);
                if !minimal || res.degradation > lambda_max {
                    rep.invalid += 1;
                }
                let ratio = res.cost / best;
                rep.worst_ratio = rep.worst_ratio.max(ratio);
                if ratio <= 1.10 {
                    rep.within_tolerance += 1;
                }
            }
            Err(_) => rep.invalid += 1,
        }
    }
    rep
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn oracle_rounding_examples() {
        use RoundingModeFxp::*;
        assert_eq!(round_ratio(5, 2, Truncate), 2);
        assert_eq!(round_ratio(-5, 2, Truncate), -3);
        assert_eq!(round_ratio(5, 2, NearestUp), 3);
        assert_eq!(round_ratio(-5, 2, NearestUp), -2);
        assert_eq!(round_ratio(5, 2, NearestEven), 2);
        assert_eq!(round_ratio(7, 2, NearestEven), 4);
        let q = QFormat::new(2, 1).unwrap();
        assert_eq!(fit_raw(4, q, OverflowMode::Wrap), (-4, true));
        assert_eq!(fit_raw(4, q, OverflowMode::Saturate), (3, true));
    }

    #[test]
    fn small_sweeps_pass() {
        let r = fxp_exhaustive(4);
        assert!(r.passed(), "{r}");
        let r = flp_exhaustive(2..=2, 1..=2);
        assert!(r.passed(), "{r}");
        let r = rounding_bias_sweep(5, 3);
        assert!(r.passed(), "{r}");
    }

    #[test]
    fn report_line_format() {
        let mut r = SweepReport::new("x");
        r.check(true, String::new);
        assert_eq!(r.to_string(), "x: 0 mismatches / 1 pairs");
    }
}
