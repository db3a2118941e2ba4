use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{WlError, WordlengthVector};
use crate::graph::{ExprGraph, NodeKind};

/// How a node's cost depends on its widths.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CostFormula {
    Zero,
    /// Output width.
    Out,
    /// Product of the operand widths.
    InProduct,
    /// Sum of the operand widths.
    InSum,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "CostTermDoc", into = "CostTermDoc")]
pub struct CostTerm {
    pub formula: CostFormula,
    /// Nonnegative multiplier; keeps every term monotone in the widths.
    pub scale: f64,
}

/// Accepts either `"in_product"` or `{ formula = "in_product", scale = 2 }`.
#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum CostTermDoc {
    Formula(CostFormula),
    Full {
        formula: CostFormula,
        #[serde(default = "one")]
        scale: f64,
    },
}

fn one() -> f64 {
    1.0
}

impl From<CostTermDoc> for CostTerm {
    fn from(d: CostTermDoc) -> Self {
        match d {
            CostTermDoc::Formula(formula) => CostTerm { formula, scale: 1.0 },
            CostTermDoc::Full { formula, scale } => CostTerm { formula, scale },
        }
    }
}

impl From<CostTerm> for CostTermDoc {
    fn from(t: CostTerm) -> Self {
        CostTermDoc::Full { formula: t.formula, scale: t.scale }
    }
}

impl CostTerm {
    pub const fn new(formula: CostFormula, scale: f64) -> Self {
        Self { formula, scale }
    }

    pub fn eval(&self, w_in: &[i32], w_out: i32) -> f64 {
        let v = match self.formula {
            CostFormula::Zero => 0.0,
            CostFormula::Out => w_out as f64,
            CostFormula::InProduct => w_in.iter().map(|&w| w as f64).product(),
            CostFormula::InSum => w_in.iter().map(|&w| w as f64).sum(),
        };
        self.scale * v
    }
}

/// Per-kind cost table; a graph costs the sum of its node costs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CostModel {
    pub terms: BTreeMap<NodeKind, CostTerm>,
}

impl Default for CostModel {
    /// Add/sub cost their output width, mul the product of its operand
    /// widths, div twice that; inputs, constants and outputs are free.
    fn default() -> Self {
        use CostFormula::*;
        let terms = BTreeMap::from([
            (NodeKind::Input, CostTerm::new(Zero, 1.0)),
            (NodeKind::Const, CostTerm::new(Zero, 1.0)),
            (NodeKind::Add, CostTerm::new(Out, 1.0)),
            (NodeKind::Sub, CostTerm::new(Out, 1.0)),
            (NodeKind::Mul, CostTerm::new(InProduct, 1.0)),
            (NodeKind::Div, CostTerm::new(InProduct, 2.0)),
            (NodeKind::Output, CostTerm::new(Zero, 1.0)),
        ]);
        Self { terms }
    }
}

impl CostModel {
    /// Default table plus a register cost of one per input bit.
    pub fn with_input_registers() -> Self {
        let mut m = Self::default();
        m.terms.insert(NodeKind::Input, CostTerm::new(CostFormula::Out, 1.0));
        m
    }

    pub fn validate(&self) -> Result<(), WlError> {
        for (k, t) in &self.terms {
            if !(t.scale >= 0.0 && t.scale.is_finite()) {
                return Err(WlError::Config(format!("cost scale for {k} must be finite and nonnegative")));
            }
        }
        Ok(())
    }
}

/// Width of every node given the eligible widths; outputs take their
/// operand's width.
pub(crate) fn node_widths(g: &ExprGraph, w: &WordlengthVector) -> Result<Vec<i32>, WlError> {
    let eligible = g.eligible();
    if eligible.len() != w.0.len() {
        return Err(WlError::Dimension { expected: eligible.len(), got: w.0.len() });
    }
    let mut widths = vec![0; g.len()];
    for (&i, &wi) in eligible.iter().zip(&w.0) {
        widths[i] = wi;
    }
    for (i, n) in g.nodes().iter().enumerate() {
        if n.kind == NodeKind::Output {
            widths[i] = widths[n.args[0]];
        }
    }
    Ok(widths)
}

/// Sum of per-node costs.
pub fn evaluate_cost(g: &ExprGraph, w: &WordlengthVector, cm: &CostModel) -> Result<f64, WlError> {
    let widths = node_widths(g, w)?;
    let mut total = 0.0;
    for (i, n) in g.nodes().iter().enumerate() {
        let term = cm.terms.get(&n.kind).ok_or(WlError::UnknownOp(n.kind))?;
        let w_in: Vec<i32> = n.args.iter().map(|&a| widths[a]).collect();
        total += term.eval(&w_in, widths[i]);
    }
    Ok(total)
}
