use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::KernelError;
use crate::arith::{Arithmetic, Fixed, Golden, Minifloat, NumericConfig};
use crate::flp::{FlPFormat, FlpRounding};
use crate::fxp::QFormat;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Cpx<V> {
    pub re: V,
    pub im: V,
}

impl<V> Cpx<V> {
    pub fn new(re: V, im: V) -> Self {
        Self { re, im }
    }
}

/// How fixed-point runs keep intermediate values in range.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FftScaling {
    /// Stage `s` results carry `s + 1` more integer bits than the inputs,
    /// which bounds every value when inputs lie in the unit disk.
    #[default]
    GuardBits,
    /// One format everywhere; out-of-range results are handled by the
    /// overflow mode.
    Uniform,
}

/// Number systems and twiddle table of one transform size.
#[derive(Debug, Clone)]
pub struct FftPlan<A: Arithmetic> {
    n: usize,
    log2n: usize,
    input: A,
    /// `stages[s]` computes the butterflies of stage `s`.
    stages: Vec<A>,
    /// `twiddles[k] = e^(-2πik/N)` for `k < N/2`.
    twiddles: Vec<Cpx<A::Value>>,
}

fn log2_exact(n: usize) -> Result<usize, KernelError> {
    if n == 0 || !n.is_power_of_two() {
        return Err(KernelError::NotPowerOfTwo(n));
    }
    Ok(n.trailing_zeros() as usize)
}

fn encode_twiddles<A: Arithmetic>(a: &A, n: usize) -> Vec<Cpx<A::Value>> {
    (0..n / 2)
        .map(|k| {
            let t = 2.0 * PI * k as f64 / n as f64;
            Cpx::new(a.from_f64(t.cos()), a.from_f64(-t.sin()))
        })
        .collect()
}

impl<A: Arithmetic + Clone> FftPlan<A> {
    /// Inputs, twiddles and every stage in `a`.
    pub fn uniform(a: A, n: usize) -> Result<Self, KernelError> {
        let log2n = log2_exact(n)?;
        let twiddles = encode_twiddles(&a, n);
        Ok(Self { n, log2n, stages: vec![a.clone(); log2n], input: a, twiddles })
    }
}

impl<A: Arithmetic> FftPlan<A> {
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn input(&self) -> &A {
        &self.input
    }

    pub fn stage(&self, s: usize) -> &A {
        &self.stages[s]
    }

    /// Arithmetic of the transform outputs.
    pub fn output(&self) -> &A {
        self.stages.last().unwrap_or(&self.input)
    }

    pub fn encode(&self, x: &[Cpx<f64>]) -> Vec<Cpx<A::Value>> {
        x.iter().map(|c| Cpx::new(self.input.from_f64(c.re), self.input.from_f64(c.im))).collect()
    }
}

impl FftPlan<Fixed> {
    /// Inputs in `base`, stage `s` results with `s + 1` guard bits, and
    /// twiddles with two integer bits so that `1` is representable; all at
    /// the width of `base`.
    pub fn guarded(base: Fixed, n: usize) -> Result<Self, KernelError> {
        let log2n = log2_exact(n)?;
        let w = base.fmt.width();
        let tfmt = QFormat::new(2, w - 2).map_err(|e| KernelError::Config(e.to_string()))?;
        let twiddle = Fixed::new(tfmt, base.rounding, base.overflow);
        let stages = (0..log2n as i32)
            .map(|s| {
                QFormat::new(base.fmt.m + s + 1, base.fmt.n - s - 1)
                    .map(|f| Fixed::new(f, base.rounding, base.overflow))
                    .map_err(|e| KernelError::Config(e.to_string()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self { n, log2n, twiddles: encode_twiddles(&twiddle, n), input: base, stages })
    }
}

/// `o · w` with four multiplications and two additions/subtractions.
fn cmul<A: Arithmetic>(a: &A, o: &Cpx<A::Value>, w: &Cpx<A::Value>) -> Cpx<A::Value> {
    let re = a.sub(&a.mul(&o.re, &w.re), &a.mul(&o.im, &w.im));
    let im = a.add(&a.mul(&o.re, &w.im), &a.mul(&o.im, &w.re));
    Cpx::new(re, im)
}

/// `(e + w·o, e − w·o)`: six additions/subtractions, four multiplications.
fn butterfly<A: Arithmetic>(
    a: &A,
    e: &Cpx<A::Value>,
    o: &Cpx<A::Value>,
    w: &Cpx<A::Value>,
) -> (Cpx<A::Value>, Cpx<A::Value>) {
    let t = cmul(a, o, w);
    let top = Cpx::new(a.add(&e.re, &t.re), a.add(&e.im, &t.im));
    let bottom = Cpx::new(a.sub(&e.re, &t.re), a.sub(&e.im, &t.im));
    (top, bottom)
}

/// Iterative radix-2 decimation-in-time transform of encoded inputs.
pub fn fft_dit<A: Arithmetic>(plan: &FftPlan<A>, x: &[Cpx<A::Value>]) -> Result<Vec<Cpx<A::Value>>, KernelError> {
    let n = plan.n;
    if x.len() != n {
        return Err(KernelError::Length(x.len(), n));
    }
    let bits = plan.log2n as u32;
    let mut y: Vec<Cpx<A::Value>> = (0..n)
        .map(|i| {
            let j = if bits == 0 { 0 } else { i.reverse_bits() >> (usize::BITS - bits) };
            x[j].clone()
        })
        .collect();
    for s in 0..plan.log2n {
        let half = 1 << s;
        let step = n / (2 * half);
        let a = &plan.stages[s];
        for start in (0..n).step_by(2 * half) {
            for k in 0..half {
                let (top, bottom) = butterfly(a, &y[start + k], &y[start + k + half], &plan.twiddles[k * step]);
                y[start + k] = top;
                y[start + k + half] = bottom;
            }
        }
    }
    Ok(y)
}

/// Recursive even/odd split performing the same operations as
/// [`fft_dit`] in the same number systems.
pub fn fft_recursive<A: Arithmetic>(plan: &FftPlan<A>, x: &[Cpx<A::Value>]) -> Result<Vec<Cpx<A::Value>>, KernelError> {
    if x.len() != plan.n {
        return Err(KernelError::Length(x.len(), plan.n));
    }
    fn rec<A: Arithmetic>(plan: &FftPlan<A>, x: &[Cpx<A::Value>]) -> Vec<Cpx<A::Value>> {
        let len = x.len();
        if len == 1 {
            return x.to_vec();
        }
        let even: Vec<_> = x.iter().step_by(2).cloned().collect();
        let odd: Vec<_> = x.iter().skip(1).step_by(2).cloned().collect();
        let (e, o) = (rec(plan, &even), rec(plan, &odd));
        let a = &plan.stages[len.trailing_zeros() as usize - 1];
        let step = plan.n / len;
        let mut out = vec![None; len];
        for k in 0..len / 2 {
            let (top, bottom) = butterfly(a, &e[k], &o[k], &plan.twiddles[k * step]);
            out[k] = Some(top);
            out[k + len / 2] = Some(bottom);
        }
        out.into_iter().map(|v| v.expect("every bin written")).collect()
    }
    Ok(rec(plan, x))
}

/// Direct `O(N²)` DFT in double precision.
pub fn direct_dft(x: &[Cpx<f64>]) -> Vec<Cpx<f64>> {
    let n = x.len();
    (0..n)
        .map(|k| {
            let mut acc = Cpx::new(0.0, 0.0);
            for (j, v) in x.iter().enumerate() {
                let t = -2.0 * PI * ((j * k) % n) as f64 / n as f64;
                let (s, c) = t.sin_cos();
                acc.re += v.re * c - v.im * s;
                acc.im += v.re * s + v.im * c;
            }
            acc
        })
        .collect()
}

/// Mean squared magnitude of the bin differences.
pub fn fft_mse(y: &[Cpx<f64>], y_gold: &[Cpx<f64>]) -> Result<f64, KernelError> {
    if y.len() != y_gold.len() {
        return Err(KernelError::Length(y.len(), y_gold.len()));
    }
    if y.is_empty() {
        return Ok(0.0);
    }
    let s: f64 = y.iter().zip(y_gold).map(|(a, b)| (a.re - b.re).powi(2) + (a.im - b.im).powi(2)).sum();
    Ok(s / y.len() as f64)
}

/// `count` vectors of `n` points uniform in the closed unit disk.
pub fn unit_disk_inputs(n: usize, count: usize, seed: u64) -> Vec<Vec<Cpx<f64>>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            (0..n)
                .map(|_| {
                    let r = rng.random_range(0.0..=1.0f64).sqrt();
                    let t = rng.random_range(0.0..2.0 * PI);
                    Cpx::new(r * t.cos(), r * t.sin())
                })
                .collect()
        })
        .collect()
}

fn transform<A: Arithmetic>(plan: &FftPlan<A>, x: &[Cpx<f64>]) -> Result<Vec<Cpx<f64>>, KernelError> {
    let y = fft_dit(plan, &plan.encode(x))?;
    let out = plan.output();
    Ok(y.iter().map(|c| Cpx::new(out.to_f64(&c.re), out.to_f64(&c.im))).collect())
}

/// Transform of `x` in `nc`, decoded to double precision. Guard bits only
/// apply to fixed point.
pub fn run_fft(nc: &NumericConfig, scaling: FftScaling, x: &[Cpx<f64>]) -> Result<Vec<Cpx<f64>>, KernelError> {
    let n = x.len();
    match *nc {
        NumericConfig::Golden => transform(&FftPlan::uniform(Golden::<f64>::new(), n)?, x),
        NumericConfig::Float(fmt) => transform(&FftPlan::uniform(Minifloat::new(fmt), n)?, x),
        NumericConfig::Fixed { fmt, rounding, overflow } => {
            let base = Fixed::new(fmt, rounding, overflow);
            match scaling {
                FftScaling::GuardBits => transform(&FftPlan::guarded(base, n)?, x),
                FftScaling::Uniform => transform(&FftPlan::uniform(base, n)?, x),
            }
        }
    }
}

/// Mean of [`fft_mse`] over several inputs against the double-precision
/// transform.
pub fn mean_fft_mse(nc: &NumericConfig, scaling: FftScaling, inputs: &[Vec<Cpx<f64>>]) -> Result<f64, KernelError> {
    if inputs.is_empty() {
        return Ok(0.0);
    }
    let mut total = 0.0;
    for x in inputs {
        let gold = run_fft(&NumericConfig::Golden, scaling, x)?;
        total += fft_mse(&run_fft(nc, scaling, x)?, &gold)?;
    }
    Ok(total / inputs.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExponentChoice {
    pub format: FlPFormat,
    pub mse: f64,
}

/// The exponent/mantissa split of a `width`-bit float with the lowest mean
/// FFT error on `inputs`; every `E` in `2..=width-2` with `M = width-1-E` is
/// tried and ties go to the smaller `E`.
pub fn exponent_search(
    width: u32,
    rounding: FlpRounding,
    inputs: &[Vec<Cpx<f64>>],
) -> Result<ExponentChoice, KernelError> {
    if width < 4 {
        return Err(KernelError::Config(format!("width {width} leaves no exponent/mantissa split")));
    }
    let mut best: Option<ExponentChoice> = None;
    for e in 2..=width - 2 {
        let Ok(format) = FlPFormat::new(e, width - 1 - e, rounding) else { continue };
        let mse = mean_fft_mse(&NumericConfig::Float(format), FftScaling::Uniform, inputs)?;
        if best.is_none_or(|b| mse < b.mse) {
            best = Some(ExponentChoice { format, mse });
        }
    }
    best.ok_or_else(|| KernelError::Config(format!("no float format of width {width}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::Counting;
    use crate::fxp::{OverflowMode, RoundingModeFxp};

    fn golden(x: &[Cpx<f64>]) -> Vec<Cpx<f64>> {
        run_fft(&NumericConfig::Golden, FftScaling::GuardBits, x).unwrap()
    }

    #[test]
    fn impulse_and_constant() {
        let mut x = vec![Cpx::new(0.0, 0.0); 16];
        x[0] = Cpx::new(1.0, 0.0);
        assert!(golden(&x).iter().all(|c| c.re == 1.0 && c.im == 0.0));
        let y = golden(&vec![Cpx::new(1.0, 0.0); 16]);
        assert!((y[0].re - 16.0).abs() < 1e-12);
        assert!(y[1..].iter().all(|c| c.re.abs() < 1e-12 && c.im.abs() < 1e-12));
    }

    #[test]
    fn matches_direct_dft() {
        for x in unit_disk_inputs(16, 20, 1) {
            let (a, b) = (golden(&x), direct_dft(&x));
            assert!(fft_mse(&a, &b).unwrap().sqrt() < 1e-12);
        }
    }

    #[test]
    fn iterative_and_recursive_agree_bit_for_bit() {
        let x = &unit_disk_inputs(16, 1, 2)[0];
        let base = Fixed::new(QFormat::new(1, 9).unwrap(), RoundingModeFxp::Truncate, OverflowMode::Saturate);
        let plan = FftPlan::guarded(base, 16).unwrap();
        let enc = plan.encode(x);
        assert_eq!(fft_dit(&plan, &enc).unwrap(), fft_recursive(&plan, &enc).unwrap());
        let fplan = FftPlan::uniform(Minifloat::new("flt<4,5,RN>".parse().unwrap()), 16).unwrap();
        let enc = fplan.encode(x);
        assert_eq!(fft_dit(&fplan, &enc).unwrap(), fft_recursive(&fplan, &enc).unwrap());
    }

    #[test]
    fn butterfly_operation_counts() {
        let counted = Counting::new(Golden::<f64>::new());
        let counts = counted.counts.clone();
        let plan = FftPlan::uniform(counted, 16).unwrap();
        let enc = plan.encode(&unit_disk_inputs(16, 1, 3)[0]);
        let before = (counts.adds.get() + counts.subs.get(), counts.muls.get());
        fft_dit(&plan, &enc).unwrap();
        let butterflies = 16 / 2 * 4;
        assert_eq!(counts.adds.get() + counts.subs.get() - before.0, 6 * butterflies);
        assert_eq!(counts.muls.get() - before.1, 4 * butterflies);
    }

    #[test]
    fn guard_bits_prevent_overflow() {
        let base = Fixed::new(QFormat::new(1, 11).unwrap(), RoundingModeFxp::NearestEven, OverflowMode::Wrap);
        let plan = FftPlan::guarded(base, 16).unwrap();
        for x in unit_disk_inputs(16, 200, 4) {
            fft_dit(&plan, &plan.encode(&x)).unwrap();
        }
        let events: u64 = (0..4).map(|s| plan.stage(s).overflow_events()).sum();
        assert_eq!(events, 0);
    }

    #[test]
    fn mse_definitions() {
        let y = vec![Cpx::new(1.0, 2.0); 4];
        assert_eq!(fft_mse(&y, &y).unwrap(), 0.0);
        let shifted: Vec<_> = y.iter().map(|c| Cpx::new(c.re + 0.5, c.im)).collect();
        assert_eq!(fft_mse(&shifted, &y).unwrap(), 0.25);
        assert!(fft_mse(&y[..3], &y).is_err());
    }

    #[test]
    fn exponent_search_is_total_and_prefers_small_exponents_on_ties() {
        let inputs = unit_disk_inputs(16, 4, 5);
        let c = exponent_search(8, FlpRounding::Nearest, &inputs).unwrap();
        assert!((2..=6).contains(&c.format.exp_bits));
        assert_eq!(c.format.width(), 8);
        // all-zero inputs are exact in every split
        let zeros = vec![vec![Cpx::new(0.0, 0.0); 16]];
        let c = exponent_search(10, FlpRounding::Nearest, &zeros).unwrap();
        assert_eq!((c.format.exp_bits, c.mse), (2, 0.0));
    }
}
