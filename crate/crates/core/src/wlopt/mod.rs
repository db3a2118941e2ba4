//! Word-length optimization: minimize an implementation cost over per-node
//! widths subject to a bound on the quality degradation.

mod cost;
mod energy;
mod quality;
mod solver;

pub use cost::{evaluate_cost, CostFormula, CostModel, CostTerm};
pub use energy::{
    energy_discrepancy_note, estimate_energy, EnergyModel, EnergyTable, ReferenceEnergy, REFERENCE_ENERGY,
    REFERENCE_N_DATA,
};
pub use quality::{evaluate_quality, GraphMse, QualityConstraint, QualityMetric, QualityOracle};
pub use solver::{greedy_minimize, is_locally_minimal, optimize, OptimizeResult, SolverConfig, TraceRow};

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fxp::QFormat;
use crate::graph::{annotate, eval_range_interval, iwl_from_range, AnnotatedGraph, ExprGraph, GraphError, NodeKind};
use crate::interval::Interval;
use crate::Rational;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WlError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("no cost entry for `{0}` nodes")]
    UnknownOp(NodeKind),
    #[error("word-length vector has {got} entries, graph has {expected} eligible nodes")]
    Dimension { expected: usize, got: usize },
    #[error("infeasible: degradation {best} at the width ceiling exceeds {lambda_max}")]
    Infeasible { best: f64, lambda_max: f64 },
    #[error("metric {0:?} is not available for this quality oracle")]
    UnsupportedMetric(QualityMetric),
    #[error("invalid configuration: {0}")]
    Config(String),
}

/// Total width of every eligible node, in [`ExprGraph::eligible`] order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct WordlengthVector(pub Vec<i32>);

impl fmt::Display for WordlengthVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|w| w.to_string()).collect();
        write!(f, "[{}]", parts.join(" "))
    }
}

/// A graph with integer word-lengths fixed by range analysis; only the
/// fractional parts move during optimization.
#[derive(Debug, Clone)]
pub struct Sizing {
    pub graph: ExprGraph,
    pub ranges: Vec<Interval<Rational>>,
    /// Integer word-length of every node.
    pub iwl: Vec<i32>,
}

impl Sizing {
    /// Sizes from the declared input ranges with plain interval analysis.
    /// A user format on a node fixes its integer word-length.
    pub fn new(g: &ExprGraph) -> Result<Self, WlError> {
        let report = eval_range_interval(g, &g.declared_input_ranges()?)?;
        let mut iwl: Vec<i32> = Vec::with_capacity(g.len());
        for (i, n) in g.nodes().iter().enumerate() {
            let m = if let Some(f) = n.format {
                f.m
            } else if n.kind == NodeKind::Output {
                iwl[n.args[0]]
            } else {
                let r = &report.bounds[i];
                match iwl_from_range(r.lo(), r.hi()) {
                    Ok(m) => m,
                    Err(GraphError::DegenerateRange) => 1,
                    Err(e) => return Err(e.into()),
                }
            };
            iwl.push(m);
        }
        Ok(Self { graph: g.clone(), ranges: report.bounds, iwl })
    }

    pub fn eligible_iwl(&self) -> Vec<i32> {
        self.graph.eligible().iter().map(|&i| self.iwl[i]).collect()
    }

    /// Smallest widths allowed: `m_i + n_min`, and at least one bit.
    pub fn floors(&self, n_min: i32) -> Vec<i32> {
        self.eligible_iwl().iter().map(|&m| (m + n_min).max(1)).collect()
    }

    /// Fixed-point formats for a width assignment.
    pub fn annotate(&self, w: &WordlengthVector) -> Result<AnnotatedGraph, WlError> {
        let widths = cost::node_widths(&self.graph, w)?;
        let mut formats: Vec<QFormat> = Vec::with_capacity(self.graph.len());
        for (i, n) in self.graph.nodes().iter().enumerate() {
            let fmt = if n.kind == NodeKind::Output {
                formats[n.args[0]]
            } else {
                let m = self.iwl[i];
                QFormat::new(m, widths[i] - m).map_err(|source| GraphError::Format { id: n.id.clone(), source })?
            };
            formats.push(fmt);
        }
        Ok(annotate(&self.graph, self.ranges.clone(), formats)?)
    }
}
