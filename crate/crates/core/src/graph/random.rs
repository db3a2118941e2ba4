//! Random graphs and input samples for property tests and sweeps.

use rand::Rng;

use super::{eval_range_quantized, ExprGraph, NodeKind};
use crate::interval::Interval;
use crate::rational::{pow2, to_f64};
use crate::Rational;

#[derive(Debug, Clone)]
pub struct RandomDagConfig {
    /// Upper bound on the node count, outputs included.
    pub max_nodes: usize,
    pub max_inputs: usize,
    /// Fractional word-length the divisor-safety check assumes.
    pub fwl: i32,
    /// Intervals wider than this magnitude are not extended further.
    pub max_magnitude: f64,
}

impl Default for RandomDagConfig {
    fn default() -> Self {
        Self { max_nodes: 20, max_inputs: 3, fwl: 8, max_magnitude: 1e5 }
    }
}

fn dyadic(rng: &mut impl Rng, lo: i64, hi: i64, frac_bits: i64) -> Rational {
    let k = rng.random_range(lo..=hi);
    Rational::new(k.into(), pow2(frac_bits).to_integer())
}

fn random_range(rng: &mut impl Rng) -> Interval<Rational> {
    match rng.random_range(0..4) {
        // sign-definite, away from zero: usable as a divisor
        0 => {
            let lo = dyadic(rng, 2, 8, 2);
            let hi = &lo + dyadic(rng, 1, 12, 2);
            if rng.random_bool(0.5) {
                Interval::new(lo, hi).unwrap()
            } else {
                Interval::new(-hi, -lo).unwrap()
            }
        }
        _ => {
            let lo = -dyadic(rng, 0, 16, 2);
            let hi = dyadic(rng, 1, 16, 2);
            Interval::new(lo, hi).unwrap()
        }
    }
}

/// Favours recent nodes so graphs get deep.
fn pick(rng: &mut impl Rng, usable: &[usize]) -> usize {
    let k = usable.len();
    let back = rng.random_range(0..k.min(4));
    if rng.random_bool(0.6) {
        usable[k - 1 - back]
    } else {
        usable[rng.random_range(0..k)]
    }
}

/// Random DAG with 1..=`max_inputs` inputs, optional constants, binary
/// operators over earlier nodes and one or two outputs. Divisors are
/// restricted to nodes whose quantized range stays at least 1/4 away from
/// zero, and intervals are kept below `max_magnitude`.
pub fn random_dag(rng: &mut impl Rng, cfg: &RandomDagConfig) -> ExprGraph {
    assert!(cfg.max_nodes >= 4, "need room for an input, two operators and an output");
    let total = rng.random_range(4..=cfg.max_nodes);
    let n_outputs = if total >= 8 && rng.random_bool(0.3) { 2 } else { 1 };
    let mut g = ExprGraph::new();
    let n_inputs = rng.random_range(1..=cfg.max_inputs.min(total - 2));
    for i in 0..n_inputs {
        g.input(&format!("x{i}"), random_range(rng)).unwrap();
    }
    let margin = Rational::new(1.into(), 4.into());
    let mut last_op = None;
    while g.len() < total - n_outputs {
        if rng.random_bool(0.1) {
            let mut v = dyadic(rng, -16, 16, 3);
            if num_traits::Zero::is_zero(&v) {
                v = Rational::from_integer(1.into());
            }
            g.constant(&format!("c{}", g.len()), v).unwrap();
            continue;
        }
        let ranges = g.declared_input_ranges().unwrap();
        let fwl = vec![cfg.fwl; g.len()];
        let quant = eval_range_quantized(&g, &ranges, &fwl).unwrap();
        let usable: Vec<usize> = g.eligible();
        let mut placed = false;
        for _ in 0..32 {
            let kind = match rng.random_range(0..10) {
                0..=2 => NodeKind::Add,
                3..=5 => NodeKind::Sub,
                6..=8 => NodeKind::Mul,
                _ => NodeKind::Div,
            };
            let a = pick(rng, &usable);
            let b = pick(rng, &usable);
            if kind == NodeKind::Div {
                let d = &quant.bounds[b];
                let away = *d.lo() >= margin || *d.hi() <= -margin.clone();
                if !away {
                    continue;
                }
            }
            let candidate = match kind {
                NodeKind::Add => quant.bounds[a].add(&quant.bounds[b]),
                NodeKind::Sub => quant.bounds[a].sub(&quant.bounds[b]),
                NodeKind::Mul => quant.bounds[a].mul(&quant.bounds[b]),
                _ => quant.bounds[a].div(&quant.bounds[b]).unwrap(),
            };
            if to_f64(&candidate.magnitude()) > cfg.max_magnitude {
                continue;
            }
            let id = format!("n{}", g.len());
            let i = g.op(&id, kind, &[a, b]).unwrap();
            last_op = Some(i);
            placed = true;
            break;
        }
        if !placed {
            // fall back to an always-safe addition of the last two values
            let k = usable.len();
            let (a, b) = (usable[k - 1], usable[k.saturating_sub(2)]);
            last_op = Some(g.op(&format!("n{}", g.len()), NodeKind::Add, &[a, b]).unwrap());
        }
    }
    let last = last_op.unwrap_or(g.len() - 1);
    g.output("y0", last).unwrap();
    if n_outputs == 2 {
        let other = g.eligible()[rng.random_range(0..g.eligible().len())];
        g.output("y1", other).unwrap();
    }
    g
}

/// `count` input vectors drawn uniformly from the declared input ranges.
pub fn sample_inputs(g: &ExprGraph, rng: &mut impl Rng, count: usize) -> Vec<Vec<f64>> {
    let ranges: Vec<(f64, f64)> = g
        .declared_input_ranges()
        .expect("inputs have ranges")
        .iter()
        .map(|r| (to_f64(r.lo()), to_f64(r.hi())))
        .collect();
    (0..count)
        .map(|_| ranges.iter().map(|&(lo, hi)| if lo == hi { lo } else { rng.random_range(lo..=hi) }).collect())
        .collect()
}
