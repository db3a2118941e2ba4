use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{Sizing, WlError, WordlengthVector};
use crate::fxp::{OverflowMode, RoundingModeFxp};
use crate::graph::simulate_graph_fxp;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QualityMetric {
    Mse,
    Cmse,
    ErrorRate,
}

/// Upper bound on the degradation of a finite-precision run against a
/// double-precision reference.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QualityConstraint {
    #[serde(default = "default_metric")]
    pub metric: QualityMetric,
    /// `"inf"` disables the constraint.
    #[serde(deserialize_with = "de_bound", serialize_with = "ser_bound")]
    pub lambda_max: f64,
    #[serde(default = "default_rounding")]
    pub rounding: RoundingModeFxp,
    #[serde(default = "default_overflow")]
    pub overflow: OverflowMode,
}

fn default_metric() -> QualityMetric {
    QualityMetric::Mse
}

fn default_rounding() -> RoundingModeFxp {
    RoundingModeFxp::Truncate
}

fn default_overflow() -> OverflowMode {
    OverflowMode::Saturate
}

fn ser_bound<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    if x.is_infinite() && *x > 0.0 {
        s.serialize_str("inf")
    } else {
        s.serialize_f64(*x)
    }
}

fn de_bound<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Bound {
        Num(f64),
        Text(String),
    }
    match Bound::deserialize(d)? {
        Bound::Num(x) => Ok(x),
        Bound::Text(s) => match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "+inf" | "infinity" => Ok(f64::INFINITY),
            other => other.parse().map_err(serde::de::Error::custom),
        },
    }
}

impl QualityConstraint {
    pub fn mse(lambda_max: f64) -> Self {
        Self { metric: QualityMetric::Mse, lambda_max, rounding: default_rounding(), overflow: default_overflow() }
    }

    pub fn admits(&self, degradation: f64) -> bool {
        degradation <= self.lambda_max
    }
}

/// Degradation of a width assignment, measured against a fixed reference.
pub trait QualityOracle {
    /// Number of free widths.
    fn dimension(&self) -> usize;
    fn degradation(&self, w: &WordlengthVector) -> Result<f64, WlError>;
}

/// Mean squared output error of the fixed-point graph over a fixed sample
/// set. The double-precision reference is computed once at construction.
#[derive(Debug, Clone)]
pub struct GraphMse {
    sizing: Sizing,
    samples: Vec<Vec<f64>>,
    /// `golden[k][s]`: reference value of output `k` on sample `s`.
    golden: Vec<Vec<f64>>,
    rounding: RoundingModeFxp,
    overflow: OverflowMode,
}

impl GraphMse {
    pub fn new(sizing: Sizing, qc: &QualityConstraint, samples: Vec<Vec<f64>>) -> Result<Self, WlError> {
        if qc.metric != QualityMetric::Mse {
            return Err(WlError::UnsupportedMetric(qc.metric));
        }
        let n_inputs = sizing.graph.inputs().len();
        if let Some(bad) = samples.iter().find(|s| s.len() != n_inputs) {
            return Err(crate::graph::GraphError::LengthMismatch { expected: n_inputs, got: bad.len() }.into());
        }
        let outs = sizing.graph.outputs();
        let mut golden = vec![Vec::with_capacity(samples.len()); outs.len()];
        for s in &samples {
            let vals = sizing.graph.eval_f64(s);
            for (k, &o) in outs.iter().enumerate() {
                golden[k].push(vals[o]);
            }
        }
        Ok(Self { sizing, samples, golden, rounding: qc.rounding, overflow: qc.overflow })
    }

    pub fn sizing(&self) -> &Sizing {
        &self.sizing
    }
}

impl QualityOracle for GraphMse {
    fn dimension(&self) -> usize {
        self.sizing.graph.eligible().len()
    }

    fn degradation(&self, w: &WordlengthVector) -> Result<f64, WlError> {
        let ag = self.sizing.annotate(w)?;
        let sim = simulate_graph_fxp(&ag, &self.samples, self.rounding, self.overflow)?;
        let mut sum = 0.0;
        let mut count = 0usize;
        for (got, want) in sim.outputs.iter().zip(&self.golden) {
            for (v, g) in got.iter().zip(want) {
                let e = v.to_f64() - g;
                sum += e * e;
                count += 1;
            }
        }
        Ok(if count == 0 { 0.0 } else { sum / count as f64 })
    }
}

/// One-shot degradation of `w`; builds the reference for `samples`.
pub fn evaluate_quality(
    sizing: &Sizing,
    w: &WordlengthVector,
    qc: &QualityConstraint,
    samples: &[Vec<f64>],
) -> Result<f64, WlError> {
    GraphMse::new(sizing.clone(), qc, samples.to_vec())?.degradation(w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{ExprGraph, NodeKind};
    use crate::interval::Interval;
    use crate::rational::parse_rational;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn identity() -> Sizing {
        let mut g = ExprGraph::new();
        let r = Interval::new(parse_rational("-1").unwrap(), parse_rational("1").unwrap()).unwrap();
        let x = g.input("x", r).unwrap();
        g.output("y", x).unwrap();
        Sizing::new(&g).unwrap()
    }

    #[test]
    fn exact_inputs_give_zero_error() {
        let s = identity();
        let samples: Vec<Vec<f64>> = (-8..8).map(|k| vec![k as f64 / 8.0]).collect();
        // m = 2, n = 3 represents every sample
        let d = evaluate_quality(&s, &WordlengthVector(vec![5]), &QualityConstraint::mse(0.0), &samples).unwrap();
        assert_eq!(d, 0.0);
    }

    #[test]
    fn rounded_identity_matches_uniform_noise_power() {
        let s = identity();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let samples: Vec<Vec<f64>> = (0..200_000).map(|_| vec![rng.random_range(-1.0..1.0)]).collect();
        let n = 6;
        let q = (2.0f64).powi(-n);
        let mut qc = QualityConstraint::mse(f64::INFINITY);
        qc.rounding = RoundingModeFxp::NearestEven;
        let mse = evaluate_quality(&s, &WordlengthVector(vec![2 + n]), &qc, &samples).unwrap();
        let expect = q * q / 12.0;
        assert!((mse / expect - 1.0).abs() < 0.05, "{mse} vs {expect}");
    }

    #[test]
    fn truncation_error_is_monotone_in_width() {
        let mut g = ExprGraph::new();
        let r = Interval::new(parse_rational("-2").unwrap(), parse_rational("2").unwrap()).unwrap();
        let x = g.input("x", r.clone()).unwrap();
        let y = g.input("y", r).unwrap();
        let p = g.op("p", NodeKind::Mul, &[x, y]).unwrap();
        let s = g.op("s", NodeKind::Add, &[p, x]).unwrap();
        g.output("o", s).unwrap();
        let sizing = Sizing::new(&g).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let samples: Vec<Vec<f64>> =
            (0..2000).map(|_| vec![rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)]).collect();
        let oracle = GraphMse::new(sizing, &QualityConstraint::mse(0.0), samples).unwrap();
        let base = vec![10, 10, 14, 14];
        let q0 = oracle.degradation(&WordlengthVector(base.clone())).unwrap();
        for i in 0..base.len() {
            let mut w = base.clone();
            w[i] -= 1;
            assert!(oracle.degradation(&WordlengthVector(w)).unwrap() >= q0);
        }
    }

    #[test]
    fn constraint_parses_infinite_bound() {
        let qc: QualityConstraint = serde_json::from_str(r#"{"lambda_max": "inf"}"#).unwrap();
        assert!(qc.lambda_max.is_infinite());
        assert_eq!(qc.metric, QualityMetric::Mse);
        let again: QualityConstraint = serde_json::from_str(&serde_json::to_string(&qc).unwrap()).unwrap();
        assert_eq!(again, qc);
        let qc: QualityConstraint =
            serde_json::from_str(r#"{"lambda_max": 1e-4, "rounding": "nearest_even"}"#).unwrap();
        assert_eq!(qc.rounding, RoundingModeFxp::NearestEven);
    }

    #[test]
    fn unsupported_metric_is_rejected() {
        let mut qc = QualityConstraint::mse(1.0);
        qc.metric = QualityMetric::ErrorRate;
        assert_eq!(
            GraphMse::new(identity(), &qc, vec![]).unwrap_err(),
            WlError::UnsupportedMetric(QualityMetric::ErrorRate)
        );
    }
}
