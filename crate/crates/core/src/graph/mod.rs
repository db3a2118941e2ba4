//! Dataflow graphs, range analysis and fixed-point format inference.
//!
//! A graph is a list of nodes in topological order: every operand index
//! refers to an earlier node. Input nodes carry a declared range, constant
//! nodes an exact value.

mod infer;
pub mod random;
mod range;
mod sim;

pub use infer::{annotate, infer_formats, AnnotatedGraph, NodeAnnotation};
pub use range::{
    eval_range_interval, eval_range_quantized, eval_range_simulation, iwl_from_range, RangeMethod, RangeReport,
};
pub use sim::{simulate_graph_fxp, SimResult};

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fxp::{FxpError, QFormat};
use crate::interval::{Interval, IntervalError};
use crate::rational::{parse_rational, to_decimal_string};
use crate::Rational;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("duplicate node id `{0}`")]
    DuplicateId(String),
    #[error("node `{id}` expects {expected} operand(s), got {got}")]
    Arity { id: String, expected: usize, got: usize },
    #[error("node `{id}` uses `{arg}` before it is defined")]
    ForwardReference { id: String, arg: String },
    #[error("input `{0}` has no declared range")]
    MissingRange(String),
    #[error("constant `{0}` has no value")]
    MissingValue(String),
    #[error("divisor of `{0}` may be zero")]
    DivisorContainsZero(String),
    #[error("division by zero at `{0}`")]
    DivisionByZero(String),
    #[error("range [0, 0] has no integer word-length")]
    DegenerateRange,
    #[error("node `{id}`: {source}")]
    Format { id: String, source: FxpError },
    #[error("expected {expected} entries, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("invalid graph document: {0}")]
    Document(String),
    #[error(transparent)]
    Interval(#[from] IntervalError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeKind {
    Input,
    Const,
    Add,
    Sub,
    Mul,
    Div,
    Output,
}

impl NodeKind {
    pub fn arity(self) -> usize {
        match self {
            Self::Input | Self::Const => 0,
            Self::Output => 1,
            Self::Add | Self::Sub | Self::Mul | Self::Div => 2,
        }
    }

    pub fn is_binary(self) -> bool {
        self.arity() == 2
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Input => "input",
            Self::Const => "const",
            Self::Add => "add",
            Self::Sub => "sub",
            Self::Mul => "mul",
            Self::Div => "div",
            Self::Output => "output",
        }
    }
}

impl fmt::Display for NodeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Node {
    pub id: String,
    pub kind: NodeKind,
    pub args: Vec<usize>,
    /// Value of a constant.
    pub value: Option<Rational>,
    /// Declared range of an input.
    pub range: Option<Interval<Rational>>,
    /// Format forced by the user instead of inferred.
    pub format: Option<QFormat>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ExprGraph {
    nodes: Vec<Node>,
    index: HashMap<String, usize>,
    /// Default fractional word-length, when the document gives one.
    pub default_fwl: Option<i32>,
}

impl ExprGraph {
    pub fn new() -> Self {
        Self::default()
    }

    fn push(&mut self, node: Node) -> Result<usize, GraphError> {
        if self.index.contains_key(&node.id) {
            return Err(GraphError::DuplicateId(node.id));
        }
        if node.args.len() != node.kind.arity() {
            return Err(GraphError::Arity { id: node.id, expected: node.kind.arity(), got: node.args.len() });
        }
        if let Some(&a) = node.args.iter().find(|&&a| a >= self.nodes.len()) {
            return Err(GraphError::ForwardReference { id: node.id, arg: a.to_string() });
        }
        if node.args.iter().any(|&a| self.nodes[a].kind == NodeKind::Output) {
            return Err(GraphError::Document(format!("`{}` consumes an output node", node.id)));
        }
        let i = self.nodes.len();
        self.index.insert(node.id.clone(), i);
        self.nodes.push(node);
        Ok(i)
    }

    pub fn input(&mut self, id: &str, range: Interval<Rational>) -> Result<usize, GraphError> {
        self.push(Node {
            id: id.into(),
            kind: NodeKind::Input,
            args: vec![],
            value: None,
            range: Some(range),
            format: None,
        })
    }

    pub fn constant(&mut self, id: &str, value: Rational) -> Result<usize, GraphError> {
        self.push(Node {
            id: id.into(),
            kind: NodeKind::Const,
            args: vec![],
            value: Some(value),
            range: None,
            format: None,
        })
    }

    pub fn op(&mut self, id: &str, kind: NodeKind, args: &[usize]) -> Result<usize, GraphError> {
        if matches!(kind, NodeKind::Input | NodeKind::Const) {
            return Err(GraphError::Document(format!("`{id}`: {kind} nodes take no operands")));
        }
        self.push(Node { id: id.into(), kind, args: args.to_vec(), value: None, range: None, format: None })
    }

    pub fn output(&mut self, id: &str, arg: usize) -> Result<usize, GraphError> {
        self.op(id, NodeKind::Output, &[arg])
    }

    pub fn set_format(&mut self, node: usize, fmt: QFormat) {
        self.nodes[node].format = Some(fmt);
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    /// Input node indices in declaration order.
    pub fn inputs(&self) -> Vec<usize> {
        self.indices_of(NodeKind::Input)
    }

    pub fn outputs(&self) -> Vec<usize> {
        self.indices_of(NodeKind::Output)
    }

    fn indices_of(&self, kind: NodeKind) -> Vec<usize> {
        (0..self.nodes.len()).filter(|&i| self.nodes[i].kind == kind).collect()
    }

    /// Nodes whose word-length is a free variable (everything but outputs,
    /// which inherit their operand's format).
    pub fn eligible(&self) -> Vec<usize> {
        (0..self.nodes.len()).filter(|&i| self.nodes[i].kind != NodeKind::Output).collect()
    }

    pub fn declared_input_ranges(&self) -> Result<Vec<Interval<Rational>>, GraphError> {
        self.inputs()
            .into_iter()
            .map(|i| self.nodes[i].range.clone().ok_or_else(|| GraphError::MissingRange(self.nodes[i].id.clone())))
            .collect()
    }

    /// Exact value of every node for one input vector.
    pub fn eval_exact(&self, inputs: &[Rational]) -> Result<Vec<Rational>, GraphError> {
        let input_ids = self.inputs();
        check_len(input_ids.len(), inputs.len())?;
        let mut vals: Vec<Rational> = Vec::with_capacity(self.nodes.len());
        let mut next_input = inputs.iter();
        for node in &self.nodes {
            let arg = |k: usize| &vals[node.args[k]];
            let v = match node.kind {
                NodeKind::Input => next_input.next().expect("length checked").clone(),
                NodeKind::Const => node.value.clone().ok_or_else(|| GraphError::MissingValue(node.id.clone()))?,
                NodeKind::Add => arg(0) + arg(1),
                NodeKind::Sub => arg(0) - arg(1),
                NodeKind::Mul => arg(0) * arg(1),
                NodeKind::Div => {
                    if num_traits::Zero::is_zero(arg(1)) {
                        return Err(GraphError::DivisionByZero(node.id.clone()));
                    }
                    arg(0) / arg(1)
                }
                NodeKind::Output => arg(0).clone(),
            };
            vals.push(v);
        }
        Ok(vals)
    }

    /// Double-precision value of every node for one input vector.
    pub fn eval_f64(&self, inputs: &[f64]) -> Vec<f64> {
        let mut vals = Vec::with_capacity(self.nodes.len());
        let mut next_input = inputs.iter();
        for node in &self.nodes {
            let v = match node.kind {
                NodeKind::Input => *next_input.next().expect("one value per input"),
                NodeKind::Const => crate::rational::to_f64(node.value.as_ref().expect("constant value")),
                NodeKind::Add => vals[node.args[0]] + vals[node.args[1]],
                NodeKind::Sub => vals[node.args[0]] - vals[node.args[1]],
                NodeKind::Mul => vals[node.args[0]] * vals[node.args[1]],
                NodeKind::Div => vals[node.args[0]] / vals[node.args[1]],
                NodeKind::Output => vals[node.args[0]],
            };
            vals.push(v);
        }
        vals
    }

    pub fn to_json(&self) -> String {
        let doc = GraphDoc::from(self);
        serde_json::to_string_pretty(&doc).expect("graph document serializes")
    }
}

pub(crate) fn check_len(expected: usize, got: usize) -> Result<(), GraphError> {
    if expected != got {
        return Err(GraphError::LengthMismatch { expected, got });
    }
    Ok(())
}

/// On-disk form of a graph.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GraphDoc {
    nodes: Vec<NodeDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    fwl: Option<i32>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NodeDoc {
    id: String,
    kind: NodeKind,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    args: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    value: Option<NumberDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    range: Option<[NumberDoc; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    format: Option<QFormat>,
}

/// Numbers are accepted as exact strings (`"0.1"`, `"3/7"`) or JSON numbers.
#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum NumberDoc {
    Text(String),
    Int(i64),
    Float(f64),
}

impl NumberDoc {
    fn to_rational(&self, id: &str) -> Result<Rational, GraphError> {
        let bad = || GraphError::Document(format!("`{id}`: invalid number"));
        match self {
            NumberDoc::Text(s) => parse_rational(s).map_err(|_| bad()),
            NumberDoc::Int(i) => Ok(Rational::from_integer((*i).into())),
            NumberDoc::Float(f) => crate::rational::from_f64(*f).ok_or_else(bad),
        }
    }
}

impl From<&ExprGraph> for GraphDoc {
    fn from(g: &ExprGraph) -> Self {
        let text = |x: &Rational| NumberDoc::Text(to_decimal_string(x));
        let nodes = g
            .nodes
            .iter()
            .map(|n| NodeDoc {
                id: n.id.clone(),
                kind: n.kind,
                args: n.args.iter().map(|&a| g.nodes[a].id.clone()).collect(),
                value: n.value.as_ref().map(text),
                range: n.range.as_ref().map(|r| [text(r.lo()), text(r.hi())]),
                format: n.format,
            })
            .collect();
        GraphDoc { nodes, fwl: g.default_fwl }
    }
}

impl FromStr for ExprGraph {
    type Err = GraphError;

    /// Parses the JSON document form.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let doc: GraphDoc = serde_json::from_str(s).map_err(|e| GraphError::Document(e.to_string()))?;
        let mut g = ExprGraph { default_fwl: doc.fwl, ..Default::default() };
        for nd in doc.nodes {
            let args = nd
                .args
                .iter()
                .map(|a| g.index_of(a).ok_or_else(|| GraphError::UnknownNode(a.clone())))
                .collect::<Result<Vec<_>, _>>()?;
            let i = match nd.kind {
                NodeKind::Input => {
                    if !args.is_empty() {
                        return Err(GraphError::Arity { id: nd.id, expected: 0, got: args.len() });
                    }
                    let [lo, hi] = nd.range.as_ref().ok_or_else(|| GraphError::MissingRange(nd.id.clone()))?;
                    let r = Interval::new(lo.to_rational(&nd.id)?, hi.to_rational(&nd.id)?)?;
                    g.input(&nd.id, r)?
                }
                NodeKind::Const => {
                    if !args.is_empty() {
                        return Err(GraphError::Arity { id: nd.id, expected: 0, got: args.len() });
                    }
                    let v = nd.value.as_ref().ok_or_else(|| GraphError::MissingValue(nd.id.clone()))?;
                    let v = v.to_rational(&nd.id)?;
                    g.constant(&nd.id, v)?
                }
                kind => g.op(&nd.id, kind, &args)?,
            };
            if let Some(f) = nd.format {
                g.set_format(i, f);
            }
        }
        Ok(g)
    }
}
