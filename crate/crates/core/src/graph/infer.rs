use std::fmt;

use super::{check_len, iwl_from_range, ExprGraph, GraphError, NodeKind, RangeReport};
use crate::fxp::QFormat;
use crate::interval::Interval;
use crate::Rational;

/// Scaling annotations of one node.
///
/// `op_iwl` is the integer word-length the operator itself produces
/// (`m_o`). `input_shifts[k] = m_c − m_k` aligns operand `k` on the common
/// IWL `m_c` of an addition or subtraction (a right shift when positive;
/// always zero for other kinds). `output_shift = m_d − m_o` converts the
/// operator output to the node's data format: negative values are left
/// shifts that drop redundant sign bits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeAnnotation {
    pub op_iwl: i32,
    pub input_shifts: Vec<i32>,
    pub output_shift: i32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnnotatedGraph {
    pub graph: ExprGraph,
    pub ranges: Vec<Interval<Rational>>,
    pub formats: Vec<QFormat>,
    pub annotations: Vec<NodeAnnotation>,
}

impl AnnotatedGraph {
    /// Re-annotates with one node's format replaced.
    pub fn with_format(&self, node: usize, fmt: QFormat) -> Result<AnnotatedGraph, GraphError> {
        let mut formats = self.formats.clone();
        formats[node] = fmt;
        annotate(&self.graph, self.ranges.clone(), formats)
    }

    /// Total widths of the eligible nodes, in [`ExprGraph::eligible`] order.
    pub fn widths(&self) -> Vec<i32> {
        self.graph.eligible().iter().map(|&i| self.formats[i].width()).collect()
    }
}

/// Computes the scaling annotations for a complete format assignment.
/// Output nodes must carry the format of their operand unless overridden.
pub fn annotate(
    g: &ExprGraph,
    ranges: Vec<Interval<Rational>>,
    formats: Vec<QFormat>,
) -> Result<AnnotatedGraph, GraphError> {
    check_len(g.len(), formats.len())?;
    check_len(g.len(), ranges.len())?;
    let mut annotations = Vec::with_capacity(g.len());
    for (i, node) in g.nodes().iter().enumerate() {
        let m_d = formats[i].m;
        let arg = |k: usize| formats[node.args[k]];
        let (op_iwl, input_shifts) = match node.kind {
            NodeKind::Input | NodeKind::Const => (m_d, vec![]),
            NodeKind::Add | NodeKind::Sub => {
                let m_c = arg(0).m.max(arg(1).m);
                (m_c + 1, vec![m_c - arg(0).m, m_c - arg(1).m])
            }
            NodeKind::Mul => (arg(0).m + arg(1).m, vec![0, 0]),
            NodeKind::Div => (arg(0).m + arg(1).n, vec![0, 0]),
            NodeKind::Output => (arg(0).m, vec![0]),
        };
        annotations.push(NodeAnnotation { op_iwl, input_shifts, output_shift: m_d - op_iwl });
    }
    Ok(AnnotatedGraph { graph: g.clone(), ranges, formats, annotations })
}

/// Sizes every node from its range and the given fractional word-lengths,
/// then inserts the scaling annotations. A user format on a node takes
/// precedence; a node whose range is `[0, 0]` gets one integer bit.
pub fn infer_formats(g: &ExprGraph, ranges: &RangeReport, fwl: &[i32]) -> Result<AnnotatedGraph, GraphError> {
    check_len(g.len(), fwl.len())?;
    check_len(g.len(), ranges.bounds.len())?;
    let mut formats: Vec<QFormat> = Vec::with_capacity(g.len());
    for (i, node) in g.nodes().iter().enumerate() {
        let fmt = if let Some(f) = node.format {
            f
        } else if node.kind == NodeKind::Output {
            formats[node.args[0]]
        } else {
            let r = &ranges.bounds[i];
            let m = match iwl_from_range(r.lo(), r.hi()) {
                Ok(m) => m,
                Err(GraphError::DegenerateRange) => 1,
                Err(e) => return Err(e),
            };
            QFormat::new(m, fwl[i]).map_err(|source| GraphError::Format { id: node.id.clone(), source })?
        };
        formats.push(fmt);
    }
    annotate(g, ranges.bounds.clone(), formats)
}

impl fmt::Display for AnnotatedGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{:<10} {:<7} {:<16} {:<28} {:<10} {:>4} {:>8} {:>4}",
            "node", "kind", "args", "range", "format", "m_o", "s_in", "s_out"
        )?;
        for (i, node) in self.graph.nodes().iter().enumerate() {
            let a = &self.annotations[i];
            let args: Vec<&str> = node.args.iter().map(|&k| self.graph.nodes()[k].id.as_str()).collect();
            let shifts: Vec<String> = a.input_shifts.iter().map(|s| s.to_string()).collect();
            let range = format!("[{}, {}]", short(self.ranges[i].lo()), short(self.ranges[i].hi()));
            writeln!(
                f,
                "{:<10} {:<7} {:<16} {:<28} {:<10} {:>4} {:>8} {:>4}",
                node.id,
                node.kind,
                args.join(","),
                range,
                self.formats[i].to_string(),
                a.op_iwl,
                shifts.join(","),
                a.output_shift
            )?;
        }
        Ok(())
    }
}

fn short(x: &Rational) -> String {
    let s = crate::rational::to_decimal_string(x);
    if s.len() <= 12 {
        s
    } else {
        format!("{:.6e}", crate::rational::to_f64(x))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fxp::{OverflowMode, RoundingModeFxp};
    use crate::graph::{eval_range_interval, simulate_graph_fxp};
    use crate::rational::parse_rational;

    fn iv(lo: &str, hi: &str) -> Interval<Rational> {
        Interval::new(parse_rational(lo).unwrap(), parse_rational(hi).unwrap()).unwrap()
    }

    #[test]
    fn cancellation_gets_left_shift() {
        // the sum is known to stay in [-1.5, 1.5]: two integer bits suffice
        // while propagation from the operands gives three
        let mut g = ExprGraph::new();
        let a = g.input("a", iv("-1.5", "1.5")).unwrap();
        let b = g.input("b", iv("-1.5", "1.5")).unwrap();
        let s = g.op("s", NodeKind::Add, &[a, b]).unwrap();
        let mut ranges = eval_range_interval(&g, &[iv("-1.5", "1.5"), iv("-1.5", "1.5")]).unwrap();
        ranges.bounds[s] = iv("-1.5", "1.5");
        let ag = infer_formats(&g, &ranges, &[4, 4, 4]).unwrap();
        assert_eq!(ag.formats[a].m, 2);
        assert_eq!(ag.formats[s].m, 2);
        assert_eq!(ag.annotations[s].op_iwl, 3);
        assert_eq!(ag.annotations[s].output_shift, -1);
        // every grid pair whose sum stays inside the declared sum range
        let grid: Vec<f64> = (-24..=24).map(|i| i as f64 / 16.0).collect();
        let samples: Vec<Vec<f64>> = grid
            .iter()
            .flat_map(|&x| grid.iter().map(move |&y| vec![x, y]))
            .filter(|v| (v[0] + v[1]).abs() <= 1.5)
            .collect();
        let sim = simulate_graph_fxp(&ag, &samples, RoundingModeFxp::Truncate, OverflowMode::Wrap).unwrap();
        assert_eq!(sim.overflows, 0);
    }

    #[test]
    fn mul_inputs_are_never_shifted() {
        let mut g = ExprGraph::new();
        let x = g.input("x", iv("-1", "0.5")).unwrap();
        let y = g.input("y", iv("-7", "7")).unwrap();
        let p = g.op("p", NodeKind::Mul, &[x, y]).unwrap();
        let r = eval_range_interval(&g, &g.declared_input_ranges().unwrap()).unwrap();
        let ag = infer_formats(&g, &r, &[5, 5, 5]).unwrap();
        assert_eq!(ag.annotations[p].input_shifts, vec![0, 0]);
        assert_eq!(ag.annotations[p].op_iwl, ag.formats[x].m + ag.formats[y].m);
    }

    #[test]
    fn add_aligns_on_common_iwl() {
        let mut g = ExprGraph::new();
        let x = g.input("x", iv("-2", "1")).unwrap();
        let y = g.input("y", iv("-8", "7")).unwrap();
        let s = g.op("s", NodeKind::Add, &[x, y]).unwrap();
        let r = eval_range_interval(&g, &g.declared_input_ranges().unwrap()).unwrap();
        let ag = infer_formats(&g, &r, &[4, 4, 4]).unwrap();
        assert_eq!((ag.formats[x].m, ag.formats[y].m), (2, 4));
        assert_eq!(ag.annotations[s].input_shifts, vec![2, 0]);
    }

    #[test]
    fn overrides_and_zero_ranges() {
        let mut g = ExprGraph::new();
        let x = g.input("x", iv("-1", "1")).unwrap();
        let z = g.constant("z", parse_rational("0").unwrap()).unwrap();
        let p = g.op("p", NodeKind::Mul, &[x, z]).unwrap();
        let o = g.output("o", p).unwrap();
        g.set_format(x, "Q3.2".parse().unwrap());
        let r = eval_range_interval(&g, &g.declared_input_ranges().unwrap()).unwrap();
        let ag = infer_formats(&g, &r, &[6, 6, 6, 6]).unwrap();
        assert_eq!(ag.formats[x].to_string(), "Q3.2");
        assert_eq!(ag.formats[z].m, 1);
        assert_eq!(ag.formats[o], ag.formats[p]);
        let text = ag.to_string();
        assert!(text.contains("Q3.2"));
    }
}
