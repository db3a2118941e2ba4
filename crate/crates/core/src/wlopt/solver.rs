use std::cmp::Ordering;
use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{evaluate_cost, CostModel, GraphMse, QualityConstraint, QualityOracle, Sizing, WlError, WordlengthVector};
use crate::graph::ExprGraph;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    /// Every node keeps at least this many fractional bits.
    pub n_min: i32,
    pub min_width: i32,
    /// Width ceiling; a node whose floor exceeds it is pinned at its floor.
    pub max_width: i32,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self { n_min: 0, min_width: 1, max_width: 32 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceRow {
    pub iteration: usize,
    pub w: WordlengthVector,
    pub cost: f64,
    pub degradation: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizeResult {
    pub w: WordlengthVector,
    pub cost: f64,
    pub degradation: f64,
    /// Row 0 is the bisection start; each later row is one accepted decrement.
    pub trace: Vec<TraceRow>,
    /// Distinct width vectors whose quality was simulated.
    pub evaluations: usize,
}

fn admits(q: f64, lambda_max: f64) -> bool {
    q <= lambda_max
}

struct Memo<Q> {
    quality: Q,
    seen: HashMap<Vec<i32>, f64>,
}

impl<Q: FnMut(&[i32]) -> Result<f64, WlError>> Memo<Q> {
    fn get(&mut self, w: &[i32]) -> Result<f64, WlError> {
        if let Some(&q) = self.seen.get(w) {
            return Ok(q);
        }
        let q = (self.quality)(w)?;
        self.seen.insert(w.to_vec(), q);
        Ok(q)
    }
}

/// Greedy descent over integer widths in the box `lo..=hi`.
///
/// Starts from the smallest uniform shift `u` such that `offset + u`,
/// clamped into the box, meets the bound, found by bisection. With the
/// integer word-lengths as `offset` this is the smallest uniform fractional
/// word-length; with zeros it is the smallest uniform width. It then repeatedly takes the feasible
/// single-coordinate decrement with the best cost saving per unit of added
/// degradation. A decrement that does not increase the degradation ranks
/// above every other; ties go to the larger saving, then the lower index.
/// Stops when no decrement stays feasible, so the result is locally minimal.
pub fn greedy_minimize<C, Q>(
    lo: &[i32],
    hi: &[i32],
    offset: &[i32],
    lambda_max: f64,
    cost: C,
    quality: Q,
) -> Result<OptimizeResult, WlError>
where
    C: Fn(&[i32]) -> f64,
    Q: FnMut(&[i32]) -> Result<f64, WlError>,
{
    for v in [hi, offset] {
        if v.len() != lo.len() {
            return Err(WlError::Dimension { expected: lo.len(), got: v.len() });
        }
    }
    if let Some(i) = (0..lo.len()).find(|&i| lo[i] > hi[i]) {
        return Err(WlError::Config(format!("width floor {} above ceiling {} at position {i}", lo[i], hi[i])));
    }
    let mut memo = Memo { quality, seen: HashMap::new() };
    let uniform = |u: i32| -> Vec<i32> { (0..lo.len()).map(|i| (offset[i] + u).clamp(lo[i], hi[i])).collect() };

    let u_hi = (0..lo.len()).map(|i| hi[i] - offset[i]).max().unwrap_or(0);
    let top = memo.get(hi)?;
    if !admits(top, lambda_max) {
        return Err(WlError::Infeasible { best: top, lambda_max });
    }
    let mut u_lo = (0..lo.len()).map(|i| lo[i] - offset[i]).min().unwrap_or(0);
    let mut u_ok = u_hi;
    if admits(memo.get(&uniform(u_lo))?, lambda_max) {
        u_ok = u_lo;
    } else {
        // u_lo infeasible, u_ok feasible
        while u_ok - u_lo > 1 {
            let mid = u_lo + (u_ok - u_lo) / 2;
            if admits(memo.get(&uniform(mid))?, lambda_max) {
                u_ok = mid;
            } else {
                u_lo = mid;
            }
        }
    }

    let mut w = uniform(u_ok);
    let mut q = memo.get(&w)?;
    let mut c = cost(&w);
    let mut trace = vec![TraceRow { iteration: 0, w: WordlengthVector(w.clone()), cost: c, degradation: q }];
    loop {
        // (free, ratio, saving, index, q, cost)
        let mut best: Option<(bool, f64, f64, usize, f64, f64)> = None;
        for i in 0..w.len() {
            if w[i] <= lo[i] {
                continue;
            }
            w[i] -= 1;
            let qi = memo.get(&w)?;
            let ci = cost(&w);
            w[i] += 1;
            if !admits(qi, lambda_max) {
                continue;
            }
            let saving = c - ci;
            let dq = qi - q;
            let free = dq <= 0.0;
            let ratio = if free { saving } else { saving / dq };
            let better = match &best {
                None => true,
                Some((bf, br, bs, ..)) => {
                    (free, ratio, saving).partial_cmp(&(*bf, *br, *bs)) == Some(Ordering::Greater)
                }
            };
            if better {
                best = Some((free, ratio, saving, i, qi, ci));
            }
        }
        let Some((_, _, _, i, qi, ci)) = best else { break };
        w[i] -= 1;
        q = qi;
        c = ci;
        trace.push(TraceRow { iteration: trace.len(), w: WordlengthVector(w.clone()), cost: c, degradation: q });
    }
    Ok(OptimizeResult { w: WordlengthVector(w), cost: c, degradation: q, trace, evaluations: memo.seen.len() })
}

/// True when `w` meets the bound and no single-coordinate decrement within
/// the floors does.
pub fn is_locally_minimal<Q>(w: &[i32], lo: &[i32], lambda_max: f64, mut quality: Q) -> Result<bool, WlError>
where
    Q: FnMut(&[i32]) -> Result<f64, WlError>,
{
    if !admits(quality(w)?, lambda_max) {
        return Ok(false);
    }
    let mut v = w.to_vec();
    for i in 0..v.len() {
        if v[i] <= lo[i] {
            continue;
        }
        v[i] -= 1;
        let q = quality(&v)?;
        v[i] += 1;
        if admits(q, lambda_max) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Minimizes `cm` cost over the eligible widths of `g` subject to the MSE
/// bound of `qc` on `samples`. Integer word-lengths come from interval
/// analysis of the declared input ranges; the warm start gives every node
/// the same fractional word-length.
pub fn optimize(
    g: &ExprGraph,
    cm: &CostModel,
    qc: &QualityConstraint,
    samples: &[Vec<f64>],
    cfg: &SolverConfig,
) -> Result<OptimizeResult, WlError> {
    cm.validate()?;
    let sizing = Sizing::new(g)?;
    let lo: Vec<i32> = sizing.floors(cfg.n_min).into_iter().map(|f| f.max(cfg.min_width)).collect();
    let hi: Vec<i32> = lo.iter().map(|&l| l.max(cfg.max_width)).collect();
    let iwl = sizing.eligible_iwl();
    let oracle = GraphMse::new(sizing, qc, samples.to_vec())?;
    // the cost table is checked once here so the closure cannot fail
    evaluate_cost(g, &WordlengthVector(lo.clone()), cm)?;
    let cost = |w: &[i32]| evaluate_cost(g, &WordlengthVector(w.to_vec()), cm).expect("checked above");
    let res =
        greedy_minimize(&lo, &hi, &iwl, qc.lambda_max, cost, |w| oracle.degradation(&WordlengthVector(w.to_vec())))?;
    debug_assert!(qc.admits(res.degradation));
    Ok(res)
}
