use precisionlab::fxp::{OverflowMode, QFormat, RoundingModeFxp};
use precisionlab::graph::random::{random_dag, sample_inputs, RandomDagConfig};
use precisionlab::graph::{
    eval_range_interval, eval_range_quantized, eval_range_simulation, infer_formats, simulate_graph_fxp, ExprGraph,
    NodeKind,
};
use precisionlab::interval::Interval;
use precisionlab::rational::{from_f64, parse_rational};
use precisionlab::Rational;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn iv(lo: &str, hi: &str) -> Interval<Rational> {
    Interval::new(parse_rational(lo).unwrap(), parse_rational(hi).unwrap()).unwrap()
}

#[test]
fn quantized_interval_sizing_never_overflows() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let cfg = RandomDagConfig::default();
    for case in 0..40 {
        let g = random_dag(&mut rng, &cfg);
        let fwl = vec![cfg.fwl; g.len()];
        let ranges = eval_range_quantized(&g, &g.declared_input_ranges().unwrap(), &fwl).unwrap();
        let ag = infer_formats(&g, &ranges, &fwl).unwrap();
        let samples = sample_inputs(&g, &mut rng, 1000);
        let r = RoundingModeFxp::ALL[case % 3];
        let sim = simulate_graph_fxp(&ag, &samples, r, OverflowMode::Wrap).unwrap();
        assert_eq!(sim.overflows, 0, "case {case}:\n{}", g.to_json());
    }
}

#[test]
fn interval_bounds_contain_simulation_bounds() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let cfg = RandomDagConfig::default();
    for _ in 0..30 {
        let g = random_dag(&mut rng, &cfg);
        let ranges = g.declared_input_ranges().unwrap();
        let exact = eval_range_interval(&g, &ranges).unwrap();
        let samples: Vec<Vec<Rational>> = sample_inputs(&g, &mut rng, 100)
            .into_iter()
            .map(|s| s.into_iter().map(|x| from_f64(x).unwrap()).collect())
            .collect();
        let sim = eval_range_simulation(&g, &samples).unwrap();
        for (a, b) in exact.bounds.iter().zip(&sim.bounds) {
            assert!(a.contains_interval(b), "{a} does not contain {b}");
        }
    }
}

#[test]
fn uniform_samples_nearly_reach_sum_bounds() {
    let mut g = ExprGraph::new();
    let x = g.input("x", iv("-1", "1")).unwrap();
    let s = g.op("s", NodeKind::Add, &[x, x]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let samples: Vec<Vec<Rational>> =
        sample_inputs(&g, &mut rng, 10_000).into_iter().map(|v| vec![from_f64(v[0]).unwrap()]).collect();
    let sim = eval_range_simulation(&g, &samples).unwrap();
    let b = &sim.bounds[s];
    assert!(iv("-2", "2").contains_interval(b));
    assert!(b.contains_interval(&iv("-1.99", "1.99")));
}

#[test]
fn removing_a_left_shift_is_bit_identical() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let cfg = RandomDagConfig::default();
    let mut checked = 0;
    for _ in 0..60 {
        let g = random_dag(&mut rng, &cfg);
        let fwl = vec![cfg.fwl; g.len()];
        let ranges = eval_range_quantized(&g, &g.declared_input_ranges().unwrap(), &fwl).unwrap();
        let ag = infer_formats(&g, &ranges, &fwl).unwrap();
        let samples = sample_inputs(&g, &mut rng, 300);
        let base = simulate_graph_fxp(&ag, &samples, RoundingModeFxp::NearestEven, OverflowMode::Wrap).unwrap();
        for i in 0..g.len() {
            let a = &ag.annotations[i];
            if a.output_shift >= 0 || g.nodes()[i].kind == NodeKind::Output {
                continue;
            }
            let widened = QFormat::new(a.op_iwl, ag.formats[i].n).unwrap();
            let mut alt = ag.with_format(i, widened).unwrap();
            // outputs reading this node keep the original format
            for o in g.outputs() {
                if g.nodes()[o].args[0] == i {
                    alt = alt.with_format(o, ag.formats[o]).unwrap();
                }
            }
            assert_eq!(alt.annotations[i].output_shift, 0);
            let sim = simulate_graph_fxp(&alt, &samples, RoundingModeFxp::NearestEven, OverflowMode::Wrap).unwrap();
            let vals = |s: &precisionlab::graph::SimResult| -> Vec<Vec<Rational>> {
                s.outputs.iter().map(|o| o.iter().map(|v| v.to_rational()).collect()).collect()
            };
            assert_eq!(vals(&sim), vals(&base));
            checked += 1;
        }
    }
    assert!(checked > 20, "only {checked} left shifts exercised");
}

#[test]
fn shrinking_an_attained_iwl_overflows() {
    // bounds of x + y and x * y are attained at grid corners
    let mut g = ExprGraph::new();
    let x = g.input("x", iv("-4", "3")).unwrap();
    let y = g.input("y", iv("-2", "1")).unwrap();
    let s = g.op("s", NodeKind::Add, &[x, y]).unwrap();
    let p = g.op("p", NodeKind::Mul, &[x, y]).unwrap();
    g.output("os", s).unwrap();
    g.output("op", p).unwrap();
    let ranges = eval_range_interval(&g, &g.declared_input_ranges().unwrap()).unwrap();
    let fwl = vec![2; g.len()];
    let ag = infer_formats(&g, &ranges, &fwl).unwrap();
    let corners: Vec<Vec<f64>> =
        [-4.0, 3.0].iter().flat_map(|&a| [-2.0, 1.0].into_iter().map(move |b| vec![a, b])).collect();
    let sim = simulate_graph_fxp(&ag, &corners, RoundingModeFxp::Truncate, OverflowMode::Wrap).unwrap();
    assert_eq!(sim.overflows, 0);
    for i in [x, y, s, p] {
        let f = ag.formats[i];
        let smaller = ag.with_format(i, QFormat::new(f.m - 1, f.n).unwrap()).unwrap();
        let sim = simulate_graph_fxp(&smaller, &corners, RoundingModeFxp::Truncate, OverflowMode::Wrap).unwrap();
        assert!(sim.node_overflows[i] > 0, "node {i} still fits with m = {}", f.m - 1);
    }
}
