use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use precisionlab_cli::output::read_rows;
use precisionlab_cli::report::{render, summarize};
use precisionlab_cli::run::resolve_out_dir;
use precisionlab_cli::{parse_seeds, run, CliError, ExperimentConfig, ExperimentKind, RunOptions};

#[derive(Parser)]
#[command(name = "precisionlab", version, about = "Fixed- and floating-point accuracy experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Experiment document (TOML, or JSON for `.json`).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; created if missing.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seeds, e.g. `0..5`, `0..=4` or `1,3,7`; overrides the document.
    #[arg(long, global = true, value_parser = parse_seed_list)]
    seed: Option<SeedList>,
    /// Worker threads; defaults to the number of cores.
    #[arg(long, global = true)]
    jobs: Option<usize>,
}

#[derive(Clone)]
struct SeedList(Vec<u64>);

fn parse_seed_list(s: &str) -> Result<SeedList, String> {
    parse_seeds(s).map(SeedList)
}

#[derive(Subcommand)]
enum Command {
    /// Exhaustive operator sweeps, rounding bias and optimizer benchmark.
    Conformance {
        #[command(flatten)]
        common: Common,
    },
    /// Range analysis and format inference of a graph document.
    Infer {
        graph: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Word-length optimization of a graph document.
    Optimize {
        graph: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// K-means accuracy sweep over number systems and seeds.
    Kmeans {
        #[command(flatten)]
        common: Common,
    },
    /// FFT accuracy sweep over widths and number systems.
    Fft {
        #[command(flatten)]
        common: Common,
    },
    /// Medians and Pareto marks of a result CSV.
    Report { csv: PathBuf },
}

fn experiment(kind: ExperimentKind, graph: Option<PathBuf>, common: Common) -> Result<(), CliError> {
    if let Some(jobs) = common.jobs {
        if jobs == 0 {
            return Err(CliError::Usage("--jobs must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global().map_err(|e| CliError::Usage(e.to_string()))?;
    }
    let config = match &common.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    let seeds = common.seed.map(|s| s.0).or_else(|| config.seeds.clone()).unwrap_or_else(|| kind.default_seeds());
    if seeds.is_empty() {
        return Err(CliError::Usage("empty seed list".into()));
    }
    let out_dir = resolve_out_dir(common.out.as_deref(), &config);
    let opts = RunOptions { kind, config, seeds, graph, out_dir };
    let outcome = run(&opts)?;
    for line in &outcome.lines {
        println!("{line}");
    }
    if kind != ExperimentKind::Conformance && kind != ExperimentKind::Infer {
        print!("{}", render(&summarize(&outcome.rows)));
    }
    println!("wrote {}", opts.csv_path().display());
    if outcome.failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::Assertion(format!("{} check(s) failed: {}", outcome.failures.len(), outcome.failures.join("; "))))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Conformance { common } => experiment(ExperimentKind::Conformance, None, common),
        Command::Infer { graph, common } => experiment(ExperimentKind::Infer, Some(graph), common),
        Command::Optimize { graph, common } => experiment(ExperimentKind::Optimize, Some(graph), common),
        Command::Kmeans { common } => experiment(ExperimentKind::Kmeans, None, common),
        Command::Fft { common } => experiment(ExperimentKind::Fft, None, common),
        Command::Report { csv } => read_rows(&csv).map(|rows| print!("{}", render(&summarize(&rows)))),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
