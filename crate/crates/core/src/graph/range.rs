use std::fmt;

use num_traits::{Signed, Zero};
use serde::Serialize;

use super::{check_len, ExprGraph, GraphError, NodeKind};
use crate::interval::Interval;
use crate::rational::{ceil_log2, floor_log2, pow2};
use crate::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RangeMethod {
    /// Guaranteed bounds of the exact computation.
    Interval,
    /// Guaranteed bounds of the quantized computation: every node's interval
    /// is widened by its own quantization step.
    QuantizedInterval,
    /// Observed bounds over a sample set.
    Simulation,
}

impl fmt::Display for RangeMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Interval => "interval",
            Self::QuantizedInterval => "quantized-interval",
            Self::Simulation => "simulation",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RangeReport {
    pub method: RangeMethod,
    /// One interval per node.
    pub bounds: Vec<Interval<Rational>>,
    /// Number of samples for `Simulation`, zero otherwise.
    pub samples: usize,
}

fn propagate(
    g: &ExprGraph,
    input_ranges: &[Interval<Rational>],
    mut widen: impl FnMut(usize, Interval<Rational>) -> Interval<Rational>,
) -> Result<Vec<Interval<Rational>>, GraphError> {
    check_len(g.inputs().len(), input_ranges.len())?;
    let mut next_input = input_ranges.iter();
    let mut out: Vec<Interval<Rational>> = Vec::with_capacity(g.len());
    for (i, node) in g.nodes().iter().enumerate() {
        let arg = |k: usize| &out[node.args[k]];
        let iv = match node.kind {
            NodeKind::Input => next_input.next().expect("length checked").clone(),
            NodeKind::Const => {
                Interval::point(node.value.clone().ok_or_else(|| GraphError::MissingValue(node.id.clone()))?)
            }
            NodeKind::Add => arg(0).add(arg(1)),
            NodeKind::Sub => arg(0).sub(arg(1)),
            NodeKind::Mul => arg(0).mul(arg(1)),
            NodeKind::Div => arg(0).div(arg(1)).map_err(|_| GraphError::DivisorContainsZero(node.id.clone()))?,
            NodeKind::Output => arg(0).clone(),
        };
        out.push(widen(i, iv));
    }
    Ok(out)
}

/// Interval propagation over the exact computation.
pub fn eval_range_interval(g: &ExprGraph, input_ranges: &[Interval<Rational>]) -> Result<RangeReport, GraphError> {
    let bounds = propagate(g, input_ranges, |_, iv| iv)?;
    Ok(RangeReport { method: RangeMethod::Interval, bounds, samples: 0 })
}

/// Interval propagation that also covers rounding: node `i` is widened by
/// `2^-fwl[i]`, which bounds the error of every rounding mode. Formats sized
/// from these bounds cannot overflow on in-range inputs.
pub fn eval_range_quantized(
    g: &ExprGraph,
    input_ranges: &[Interval<Rational>],
    fwl: &[i32],
) -> Result<RangeReport, GraphError> {
    check_len(g.len(), fwl.len())?;
    let bounds = propagate(g, input_ranges, |i, iv| {
        let n = match g.nodes()[i].format {
            Some(f) => f.n,
            None => fwl[i],
        };
        iv.widen(&pow2(-(n as i64)))
    })?;
    Ok(RangeReport { method: RangeMethod::QuantizedInterval, bounds, samples: 0 })
}

/// Per-node minimum and maximum over exact evaluation of every sample.
pub fn eval_range_simulation(g: &ExprGraph, samples: &[Vec<Rational>]) -> Result<RangeReport, GraphError> {
    let mut bounds: Option<Vec<Interval<Rational>>> = None;
    for s in samples {
        let vals = g.eval_exact(s)?;
        bounds = Some(match bounds {
            None => vals.into_iter().map(Interval::point).collect(),
            Some(b) => b.iter().zip(vals).map(|(iv, v)| iv.hull(&Interval::point(v))).collect(),
        });
    }
    let bounds = bounds.ok_or_else(|| GraphError::Document("simulation needs at least one sample".into()))?;
    Ok(RangeReport { method: RangeMethod::Simulation, bounds, samples: samples.len() })
}

/// Integer word-length `max(⌊log2|hi|⌋ + 2, ⌈log2|lo|⌉ + 1)` covering
/// `[lo, hi]`; a zero bound contributes no term.
pub fn iwl_from_range(lo: &Rational, hi: &Rational) -> Result<i32, GraphError> {
    let mut m: Option<i64> = None;
    if !hi.is_zero() {
        m = Some(floor_log2(&hi.abs()) + 2);
    }
    if !lo.is_zero() {
        let t = ceil_log2(&lo.abs()) + 1;
        m = Some(m.map_or(t, |v| v.max(t)));
    }
    m.map(|v| v as i32).ok_or(GraphError::DegenerateRange)
}
