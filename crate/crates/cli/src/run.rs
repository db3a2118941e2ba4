use std::path::{Path, PathBuf};
use std::time::Instant;

use precisionlab::arith::NumericConfig;
use precisionlab::conformance::{flp_exhaustive, fxp_exhaustive, optimizer_benchmark, rounding_bias_sweep};
use precisionlab::graph::random::sample_inputs;
use precisionlab::graph::{eval_range_interval, eval_range_quantized, eval_range_simulation, infer_formats, ExprGraph};
use precisionlab::kernels::{fft_widths, kmeans_runs, mean_fft_mse, unit_disk_inputs};
use precisionlab::rational::from_f64;
use precisionlab::wlopt::{energy_discrepancy_note, estimate_energy, optimize, WlError};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{ExperimentConfig, ExperimentKind, RangeChoice};
use crate::error::CliError;
use crate::output::{sort_rows, write_csv_atomic, ResultRow};

/// Everything an experiment needs; resolved from the command line and the
/// config document.
#[derive(Debug, Clone)]
pub struct RunOptions {
    pub kind: ExperimentKind,
    pub config: ExperimentConfig,
    pub seeds: Vec<u64>,
    /// Graph document of `infer` and `optimize`.
    pub graph: Option<PathBuf>,
    pub out_dir: PathBuf,
}

/// One accepted step of an optimization, tagged with its case.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceCsvRow {
    pub lambda_max: f64,
    pub seed: u64,
    pub iteration: usize,
    pub w: String,
    pub cost: f64,
    pub degradation: f64,
}

#[derive(Debug, Clone, Default)]
pub struct Outcome {
    /// Canonically ordered.
    pub rows: Vec<ResultRow>,
    /// Human-readable summary.
    pub lines: Vec<String>,
    /// Failed assertions; any entry makes the run exit with status 1.
    pub failures: Vec<String>,
    pub trace: Vec<TraceCsvRow>,
}

impl RunOptions {
    pub fn csv_path(&self) -> PathBuf {
        self.out_dir.join(format!("{}.csv", self.kind.name()))
    }

    pub fn trace_path(&self) -> PathBuf {
        self.out_dir.join("optimize_trace.csv")
    }
}

/// Runs the experiment and writes its CSV files.
pub fn run(opts: &RunOptions) -> Result<Outcome, CliError> {
    // fail before the sweep, not after it
    std::fs::create_dir_all(&opts.out_dir).map_err(|e| CliError::io(&opts.out_dir, e))?;
    let outcome = execute(opts)?;
    write_csv_atomic(&opts.csv_path(), &outcome.rows)?;
    if opts.kind == ExperimentKind::Optimize {
        write_csv_atomic(&opts.trace_path(), &outcome.trace)?;
    }
    Ok(outcome)
}

/// Runs the experiment without touching the file system beyond reading the
/// graph.
pub fn execute(opts: &RunOptions) -> Result<Outcome, CliError> {
    opts.config.check_kind(opts.kind)?;
    let mut out = match opts.kind {
        ExperimentKind::Conformance => conformance(opts)?,
        ExperimentKind::Infer => infer(opts)?,
        ExperimentKind::Optimize => optimize_graph(opts)?,
        ExperimentKind::Kmeans => kmeans(opts)?,
        ExperimentKind::Fft => fft(opts)?,
    };
    sort_rows(&mut out.rows);
    Ok(out)
}

fn usage(e: impl std::fmt::Display) -> CliError {
    CliError::Usage(e.to_string())
}

fn load_graph(opts: &RunOptions) -> Result<ExprGraph, CliError> {
    let path = opts.graph.as_deref().ok_or_else(|| usage("a graph file is required"))?;
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    text.parse().map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

fn check_range(name: &str, r: [u32; 2], lo: u32, hi: u32) -> Result<(), CliError> {
    if lo <= r[0] && r[0] <= r[1] && r[1] <= hi {
        Ok(())
    } else {
        Err(usage(format!("conformance.{name} must satisfy {lo} <= lo <= hi <= {hi}, got {r:?}")))
    }
}

fn conformance(opts: &RunOptions) -> Result<Outcome, CliError> {
    let c = &opts.config.conformance;
    check_range("flp_exp_bits", c.flp_exp_bits, 2, 8)?;
    check_range("flp_man_bits", c.flp_man_bits, 1, 8)?;
    if !(0..=10).contains(&c.fxp_max_width) || !(0..=12).contains(&c.bias_max_width) || c.bias_max_dropped < 0 {
        return Err(usage("conformance: fxp_max_width <= 10, bias_max_width <= 12 and bias_max_dropped >= 0"));
    }
    let mut out = Outcome::default();
    let mut sweep = |name: &str, metrics: &[(&str, f64)], seed: Option<u64>, line: String, passed: bool, secs: f64| {
        for (m, v) in metrics {
            out.rows.push(ResultRow::new(name, m, *v, seed, secs));
        }
        if !passed {
            out.failures.push(line.clone());
        }
        out.lines.push(line);
    };
    if c.fxp_max_width > 0 {
        let t = Instant::now();
        let r = fxp_exhaustive(c.fxp_max_width);
        let m = [("mismatches", r.mismatches as f64), ("pairs", r.pairs as f64)];
        sweep("fxp", &m, None, r.to_string(), r.passed(), t.elapsed().as_secs_f64());
    }
    let t = Instant::now();
    let r = flp_exhaustive(c.flp_exp_bits[0]..=c.flp_exp_bits[1], c.flp_man_bits[0]..=c.flp_man_bits[1]);
    let m = [("mismatches", r.mismatches as f64), ("pairs", r.pairs as f64)];
    sweep("flp", &m, None, r.to_string(), r.passed(), t.elapsed().as_secs_f64());
    if c.bias_max_width >= 2 {
        let t = Instant::now();
        let r = rounding_bias_sweep(c.bias_max_width, c.bias_max_dropped);
        let m = [("failures", r.failures.len() as f64), ("cases", r.cases.len() as f64)];
        sweep("rounding_bias", &m, None, r.to_string(), r.passed(), t.elapsed().as_secs_f64());
    }
    if c.optimizer_instances > 0 {
        for &seed in &opts.seeds {
            let t = Instant::now();
            let r = optimizer_benchmark(c.optimizer_instances, c.optimizer_samples, seed);
            let m = [
                ("within_tolerance", r.within_tolerance as f64),
                ("instances", r.instances as f64),
                ("invalid", r.invalid as f64),
                ("worst_ratio", r.worst_ratio),
            ];
            sweep("optimizer", &m, Some(seed), format!("{r} (seed {seed})"), r.passed(), t.elapsed().as_secs_f64());
        }
    }
    out.lines.extend(energy_discrepancy_note());
    Ok(out)
}

fn infer(opts: &RunOptions) -> Result<Outcome, CliError> {
    let g = load_graph(opts)?;
    let s = &opts.config.infer;
    let fwl = vec![s.fwl.or(g.default_fwl).unwrap_or(8); g.len()];
    let inputs = g.declared_input_ranges().map_err(usage)?;
    let seed = opts.seeds[0];
    let t = Instant::now();
    let (ranges, row_seed) = match s.method {
        RangeChoice::Interval => (eval_range_interval(&g, &inputs).map_err(usage)?, None),
        RangeChoice::Quantized => (eval_range_quantized(&g, &inputs, &fwl).map_err(usage)?, None),
        RangeChoice::Simulation => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let samples: Vec<Vec<_>> = sample_inputs(&g, &mut rng, s.samples)
                .into_iter()
                .map(|v| v.into_iter().map(|x| from_f64(x).expect("finite sample")).collect())
                .collect();
            (eval_range_simulation(&g, &samples).map_err(usage)?, Some(seed))
        }
    };
    let ag = infer_formats(&g, &ranges, &fwl).map_err(usage)?;
    let secs = t.elapsed().as_secs_f64();
    let mut out = Outcome { lines: ag.to_string().lines().map(String::from).collect(), ..Default::default() };
    for (node, fmt) in g.nodes().iter().zip(&ag.formats) {
        for (metric, v) in [("iwl", fmt.m), ("fwl", fmt.n), ("width", fmt.width())] {
            out.rows.push(ResultRow::new(node.id.clone(), metric, v as f64, row_seed, secs));
        }
    }
    Ok(out)
}

fn optimize_graph(opts: &RunOptions) -> Result<Outcome, CliError> {
    let g = load_graph(opts)?;
    let s = &opts.config.optimize;
    let constraints = s.constraints()?;
    let eligible: Vec<String> = g.eligible().iter().map(|&i| g.nodes()[i].id.clone()).collect();
    let mut out = Outcome::default();
    for &seed in &opts.seeds {
        let samples = sample_inputs(&g, &mut ChaCha8Rng::seed_from_u64(seed), s.samples);
        for qc in &constraints {
            let case = format!("lambda={:e}", qc.lambda_max);
            let t = Instant::now();
            let res = optimize(&g, &s.cost, qc, &samples, &s.solver);
            let secs = t.elapsed().as_secs_f64();
            let row = |metric: &str, v: f64| ResultRow::new(case.clone(), metric, v, Some(seed), secs);
            match res {
                Ok(r) => {
                    out.rows.push(row("feasible", 1.0));
                    out.rows.push(row("cost", r.cost));
                    out.rows.push(row("degradation", r.degradation));
                    out.rows.push(row("evaluations", r.evaluations as f64));
                    for (id, w) in eligible.iter().zip(&r.w.0) {
                        out.rows.push(row(&format!("w:{id}"), *w as f64));
                    }
                    out.lines.push(format!(
                        "{case} seed {seed}: w = {} cost {} {:?} {:.3e}",
                        r.w, r.cost, qc.metric, r.degradation
                    ));
                    out.trace.extend(r.trace.iter().map(|tr| TraceCsvRow {
                        lambda_max: qc.lambda_max,
                        seed,
                        iteration: tr.iteration,
                        w: tr.w.to_string(),
                        cost: tr.cost,
                        degradation: tr.degradation,
                    }));
                }
                Err(WlError::Infeasible { best, .. }) => {
                    out.rows.push(row("feasible", 0.0));
                    out.lines.push(format!("{case} seed {seed}: infeasible, best reachable {best:.3e}"));
                }
                Err(e) => return Err(usage(e)),
            }
        }
    }
    Ok(out)
}

/// Configurations compared when a K-means document lists none.
pub const DEFAULT_KMEANS_CONFIGS: [&str; 4] = ["flt<5,2,RN>", "Q3.5", "flt<5,10,RN>", "Q3.13"];

fn kmeans(opts: &RunOptions) -> Result<Outcome, CliError> {
    let c = &opts.config;
    let configs: Vec<NumericConfig> = if c.configs.is_empty() {
        DEFAULT_KMEANS_CONFIGS.iter().map(|s| s.parse().expect("built-in config")).collect()
    } else {
        c.configs.clone()
    };
    let runs = kmeans_runs(&configs, &opts.seeds, &c.dataset, &c.kmeans, c.matching).map_err(usage)?;
    let energy = c.energy.clone().unwrap_or_default();
    let mut out = Outcome::default();
    for r in &runs {
        let name = r.config.to_string();
        let row = |metric: &str, v: f64| ResultRow::new(name.clone(), metric, v, Some(r.seed), r.runtime_s);
        out.rows.push(row("error_rate", r.error_rate));
        out.rows.push(row("cmse", r.cmse));
        out.rows.push(row("n_it", r.n_it as f64));
        if let Some(w) = r.config.width() {
            out.rows.push(row("width", w as f64));
        }
        if let Some(em) = energy.get(&name) {
            out.rows.push(row("energy", estimate_energy(em, r.n_it as f64, c.dataset.n_data as u64)));
        }
    }
    out.lines.push(format!("{} runs over seeds {:?}", runs.len(), opts.seeds));
    Ok(out)
}

fn fft(opts: &RunOptions) -> Result<Outcome, CliError> {
    let c = &opts.config;
    let f = &c.fft;
    if !f.n.is_power_of_two() || f.n < 2 || f.inputs == 0 {
        return Err(usage(format!(
            "fft: n must be a power of two >= 2 and inputs >= 1, got n={} inputs={}",
            f.n, f.inputs
        )));
    }
    let per_seed: Vec<Result<Outcome, CliError>> = opts
        .seeds
        .par_iter()
        .map(|&seed| {
            let inputs = unit_disk_inputs(f.n, f.inputs, seed);
            let mut out = Outcome::default();
            for &w in &f.widths {
                let t = Instant::now();
                let row = fft_widths(&[w], f.float_rounding, &inputs).map_err(usage)?.remove(0);
                let secs = t.elapsed().as_secs_f64();
                for (name, mse) in
                    [(row.fixed.to_string(), row.fixed_mse), (row.float.format.to_string(), row.float.mse)]
                {
                    out.rows.push(ResultRow::new(name.clone(), "mse", mse, Some(seed), secs));
                    out.rows.push(ResultRow::new(name, "width", w as f64, Some(seed), secs));
                }
                let verdict = if row.fixed_mse <= row.float.mse { "fixed" } else { "float" };
                out.lines.push(format!(
                    "seed {seed} width {w:>2}: {} mse {:.3e}, {} mse {:.3e} ({verdict} better)",
                    row.fixed, row.fixed_mse, row.float.format, row.float.mse
                ));
            }
            for nc in &c.configs {
                let t = Instant::now();
                let mse = mean_fft_mse(nc, f.scaling, &inputs).map_err(usage)?;
                let secs = t.elapsed().as_secs_f64();
                out.rows.push(ResultRow::new(nc.to_string(), "mse", mse, Some(seed), secs));
                if let Some(w) = nc.width() {
                    out.rows.push(ResultRow::new(nc.to_string(), "width", w as f64, Some(seed), secs));
                }
                out.lines.push(format!("seed {seed} {nc}: mse {mse:.3e}"));
            }
            Ok(out)
        })
        .collect();
    let mut out = Outcome::default();
    for o in per_seed {
        let o = o?;
        out.rows.extend(o.rows);
        out.lines.extend(o.lines);
    }
    Ok(out)
}

/// Output directory: the command line wins over the document, which wins
/// over `./results`.
pub fn resolve_out_dir(cli: Option<&Path>, config: &ExperimentConfig) -> PathBuf {
    cli.map(Path::to_path_buf).or_else(|| config.out.clone()).unwrap_or_else(|| PathBuf::from("results"))
}
