use std::collections::BTreeMap;
use std::fmt::Write as _;

use precisionlab::kernels::median;

use crate::output::ResultRow;

/// Metrics read as cost when marking the Pareto front, by preference.
pub const COST_METRICS: [&str; 3] = ["cost", "energy", "width"];
/// Metrics read as error when marking the Pareto front, by preference.
pub const ERROR_METRICS: [&str; 4] = ["mse", "degradation", "error_rate", "cmse"];

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigSummary {
    pub config: String,
    /// Median over seeds and sample count, per metric.
    pub medians: BTreeMap<String, (f64, usize)>,
    pub pareto: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub configs: Vec<ConfigSummary>,
    /// `(cost metric, error metric)` used for the Pareto marks.
    pub axes: Option<(String, String)>,
}

/// Per-config medians across seeds and the Pareto front of the configs that
/// report both a cost and an error metric.
pub fn summarize(rows: &[ResultRow]) -> Report {
    let mut order: Vec<String> = Vec::new();
    let mut values: BTreeMap<(String, String), Vec<f64>> = BTreeMap::new();
    for r in rows {
        if !order.contains(&r.config) {
            order.push(r.config.clone());
        }
        values.entry((r.config.clone(), r.metric.clone())).or_default().push(r.value);
    }
    let mut configs: Vec<ConfigSummary> = order
        .into_iter()
        .map(|config| {
            let medians = values
                .iter()
                .filter(|((c, _), _)| *c == config)
                .map(|((_, m), v)| (m.clone(), (median(v.iter().copied()).unwrap_or(f64::NAN), v.len())))
                .collect();
            ConfigSummary { config, medians, pareto: false }
        })
        .collect();
    let present = |m: &&&str| configs.iter().any(|c| c.medians.contains_key(**m));
    let axes = COST_METRICS.iter().find(present).zip(ERROR_METRICS.iter().find(present));
    if let Some((cost, err)) = axes {
        let point = |c: &ConfigSummary| -> Option<(f64, f64)> {
            let x = c.medians.get(*cost)?.0;
            let y = c.medians.get(*err)?.0;
            (x.is_finite() && y.is_finite()).then_some((x, y))
        };
        let points: Vec<Option<(f64, f64)>> = configs.iter().map(point).collect();
        for (i, c) in configs.iter_mut().enumerate() {
            let Some(p) = points[i] else { continue };
            let dominated = points.iter().flatten().any(|q| q.0 <= p.0 && q.1 <= p.1 && (q.0 < p.0 || q.1 < p.1));
            c.pareto = !dominated;
        }
    }
    Report { configs, axes: axes.map(|(c, e)| (c.to_string(), e.to_string())) }
}

pub fn render(report: &Report) -> String {
    if report.configs.is_empty() {
        return "no data\n".to_string();
    }
    let mut s = String::new();
    for c in &report.configs {
        let mark = if c.pareto { "  [pareto]" } else { "" };
        let _ = writeln!(s, "{}{mark}", c.config);
        for (metric, (m, n)) in &c.medians {
            let _ = writeln!(s, "  {metric:<12} median {m:<12.6e} n={n}");
        }
    }
    match &report.axes {
        Some((cost, err)) => {
            let front: Vec<&str> = report.configs.iter().filter(|c| c.pareto).map(|c| c.config.as_str()).collect();
            let _ = writeln!(s, "pareto front on ({cost}, {err}): {}", front.join(", "));
        }
        None => {
            let _ = writeln!(s, "pareto front: no cost/error metric pair");
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(config: &str, metric: &str, value: f64, seed: u64) -> ResultRow {
        ResultRow::new(config, metric, value, Some(seed), 0.0)
    }

    #[test]
    fn single_row_is_its_own_median() {
        let r = summarize(&[row("Q3.5", "mse", 0.125, 0)]);
        assert_eq!(r.configs[0].medians["mse"], (0.125, 1));
        assert!(render(&r).contains("1.25"));
    }

    #[test]
    fn dominated_config_is_not_pareto() {
        let rows =
            [row("a", "width", 8.0, 0), row("a", "mse", 1e-3, 0), row("b", "width", 12.0, 0), row("b", "mse", 1e-2, 0)];
        let r = summarize(&rows);
        assert_eq!(r.axes, Some(("width".into(), "mse".into())));
        assert_eq!(r.configs.iter().map(|c| c.pareto).collect::<Vec<_>>(), vec![true, false]);
    }

    #[test]
    fn trade_offs_are_all_pareto() {
        let rows = [
            row("a", "cost", 1.0, 0),
            row("a", "error_rate", 0.5, 0),
            row("b", "cost", 2.0, 0),
            row("b", "error_rate", 0.1, 0),
            row("b", "error_rate", 0.3, 1),
            row("b", "error_rate", 0.2, 2),
        ];
        let r = summarize(&rows);
        assert!(r.configs.iter().all(|c| c.pareto));
        assert_eq!(r.configs[1].medians["error_rate"], (0.2, 3));
    }

    #[test]
    fn empty_input_says_so() {
        assert_eq!(render(&summarize(&[])), "no data\n");
    }
}
