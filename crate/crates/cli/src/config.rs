use std::path::{Path, PathBuf};

use precisionlab::arith::NumericConfig;
use precisionlab::flp::FlpRounding;
use precisionlab::kernels::{DatasetConfig, FftScaling, KMeansConfig, Matching};
use precisionlab::wlopt::{CostModel, EnergyTable, QualityConstraint, SolverConfig};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Conformance,
    Infer,
    Optimize,
    Kmeans,
    Fft,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Conformance => "conformance",
            ExperimentKind::Infer => "infer",
            ExperimentKind::Optimize => "optimize",
            ExperimentKind::Kmeans => "kmeans",
            ExperimentKind::Fft => "fft",
        }
    }

    /// Seeds used when neither the config nor the command line gives any.
    pub fn default_seeds(self) -> Vec<u64> {
        match self {
            ExperimentKind::Kmeans => (0..5).collect(),
            ExperimentKind::Fft => vec![7],
            ExperimentKind::Conformance => vec![1],
            ExperimentKind::Infer | ExperimentKind::Optimize => vec![0],
        }
    }
}

/// One experiment document (TOML, or JSON for `.json` files). Every section
/// is optional; only the one matching the experiment kind is read.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Must match the subcommand when given.
    pub kind: Option<ExperimentKind>,
    /// Number systems to sweep, in the `Qm.n[/rounding/overflow]` and
    /// `flt<E,M,RN|RZ>` notations.
    pub configs: Vec<NumericConfig>,
    pub seeds: Option<Vec<u64>>,
    pub out: Option<PathBuf>,
    pub dataset: DatasetConfig,
    pub kmeans: KMeansConfig,
    pub matching: Matching,
    /// Per-config energy models keyed by config string; defaults to the
    /// built-in reference table.
    pub energy: Option<EnergyTable>,
    pub fft: FftSection,
    pub conformance: ConformanceSection,
    pub infer: InferSection,
    pub optimize: OptimizeSection,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FftSection {
    pub n: usize,
    /// Input vectors per seed.
    pub inputs: usize,
    /// Total widths compared between guarded fixed point and the best float
    /// split; empty to run only `configs`.
    pub widths: Vec<u32>,
    pub float_rounding: FlpRounding,
    /// Scaling of the explicit fixed-point `configs`.
    pub scaling: FftScaling,
}

impl Default for FftSection {
    fn default() -> Self {
        Self {
            n: 16,
            inputs: 100,
            widths: vec![8, 10, 12, 14, 16],
            float_rounding: FlpRounding::Nearest,
            scaling: FftScaling::GuardBits,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConformanceSection {
    /// 0 skips the fixed-point sweep.
    pub fxp_max_width: i32,
    /// Inclusive exponent and mantissa width ranges of the float sweep.
    pub flp_exp_bits: [u32; 2],
    pub flp_man_bits: [u32; 2],
    pub bias_max_width: i32,
    pub bias_max_dropped: i32,
    /// 0 skips the optimizer benchmark.
    pub optimizer_instances: usize,
    pub optimizer_samples: usize,
}

impl Default for ConformanceSection {
    fn default() -> Self {
        Self {
            fxp_max_width: 8,
            flp_exp_bits: [2, 4],
            flp_man_bits: [1, 4],
            bias_max_width: 8,
            bias_max_dropped: 4,
            optimizer_instances: 100,
            optimizer_samples: 256,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RangeChoice {
    Interval,
    /// Interval analysis that also covers rounding; formats never overflow.
    #[default]
    Quantized,
    Simulation,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InferSection {
    pub method: RangeChoice,
    /// Fractional bits of every node; falls back to the graph's own `fwl`.
    pub fwl: Option<i32>,
    /// Samples for the simulation method.
    pub samples: usize,
}

impl Default for InferSection {
    fn default() -> Self {
        Self { method: RangeChoice::default(), fwl: None, samples: 10_000 }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizeSection {
    pub cost: CostModel,
    pub quality: Option<QualityConstraint>,
    /// One optimization per bound; overrides `quality.lambda_max`.
    pub lambdas: Vec<f64>,
    pub solver: SolverConfig,
    /// Input samples drawn per seed for the quality estimate.
    pub samples: usize,
}

impl Default for OptimizeSection {
    fn default() -> Self {
        Self {
            cost: CostModel::default(),
            quality: None,
            lambdas: Vec::new(),
            solver: SolverConfig::default(),
            samples: 2000,
        }
    }
}

impl OptimizeSection {
    /// One constraint per optimization case.
    pub fn constraints(&self) -> Result<Vec<QualityConstraint>, CliError> {
        let base = self.quality.unwrap_or(QualityConstraint::mse(f64::INFINITY));
        if self.lambdas.is_empty() {
            if self.quality.is_none() {
                return Err(CliError::Usage("optimize: give optimize.lambdas or optimize.quality.lambda_max".into()));
            }
            return Ok(vec![base]);
        }
        Ok(self.lambdas.iter().map(|&lambda_max| QualityConstraint { lambda_max, ..base }).collect())
    }
}

impl ExperimentConfig {
    /// Parses TOML, or JSON when the path ends in `.json`. Errors name the
    /// offending line and field.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let is_json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
        let parsed = if is_json {
            serde_json::from_str(&text).map_err(|e| e.to_string())
        } else {
            toml::from_str(&text).map_err(|e| e.to_string())
        };
        parsed.map_err(|e| CliError::Usage(format!("{}: {}", path.display(), e.trim_end())))
    }

    /// Rejects a document written for a different experiment.
    pub fn check_kind(&self, kind: ExperimentKind) -> Result<(), CliError> {
        match self.kind {
            Some(k) if k != kind => {
                Err(CliError::Usage(format!("config is for `{}` but the `{}` command was run", k.name(), kind.name())))
            }
            _ => Ok(()),
        }
    }
}

/// Parses `3`, `0,2,5`, `0..5` (end excluded) and `0..=4`, or combinations
/// separated by commas.
pub fn parse_seeds(s: &str) -> Result<Vec<u64>, String> {
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let num = |t: &str| t.trim().parse::<u64>().map_err(|_| format!("invalid seed `{t}` in `{s}`"));
        if let Some((a, b)) = part.split_once("..=") {
            out.extend(num(a)?..=num(b)?);
        } else if let Some((a, b)) = part.split_once("..") {
            out.extend(num(a)?..num(b)?);
        } else {
            out.push(num(part)?);
        }
    }
    if out.is_empty() {
        return Err(format!("no seeds in `{s}`"));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_lists() {
        assert_eq!(parse_seeds("3").unwrap(), vec![3]);
        assert_eq!(parse_seeds("0..3, 7").unwrap(), vec![0, 1, 2, 7]);
        assert_eq!(parse_seeds("1..=2").unwrap(), vec![1, 2]);
        assert!(parse_seeds("x").is_err());
        assert!(parse_seeds("").is_err());
    }

    #[test]
    fn toml_document() {
        let c: ExperimentConfig = toml::from_str(
            r#"
            kind = "kmeans"
            configs = ["flt<5,10,RN>", "Q3.13", "Q3.5/rne/wrap"]
            seeds = [0, 1]
            [dataset]
            n_data = 300
            [kmeans]
            max_iter = 20
            "#,
        )
        .unwrap();
        assert_eq!(c.kind, Some(ExperimentKind::Kmeans));
        assert_eq!(c.configs.len(), 3);
        assert_eq!(c.dataset.n_data, 300);
        assert_eq!(c.kmeans.max_iter, 20);
        assert_eq!(c.kmeans.k, 15);
    }

    #[test]
    fn unknown_fields_are_reported_with_their_line() {
        let e = toml::from_str::<ExperimentConfig>("kind = \"fft\"\n[fft]\nwidth = [8]\n").unwrap_err().to_string();
        assert!(e.contains("line 3") && e.contains("width"), "{e}");
        let e = toml::from_str::<ExperimentConfig>("configs = [\"Q3.x\"]\n").unwrap_err().to_string();
        assert!(e.contains("line 1"), "{e}");
    }

    #[test]
    fn optimize_needs_a_bound() {
        assert!(OptimizeSection::default().constraints().is_err());
        let s = OptimizeSection { lambdas: vec![1e-3, 1e-4], ..Default::default() };
        assert_eq!(s.constraints().unwrap()[1].lambda_max, 1e-4);
    }
}
