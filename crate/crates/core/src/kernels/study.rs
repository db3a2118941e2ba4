//! Multi-seed K-means and multi-width FFT experiments, shared by the
//! acceptance suite and the command-line driver.

use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use super::{
    exponent_search, gen_dataset, kmeans_metrics, mean_fft_mse, run_kmeans, unit_disk_inputs, Cpx, DatasetConfig,
    ExponentChoice, FftScaling, KMeansConfig, KernelError, Matching,
};
use crate::arith::NumericConfig;
use crate::flp::FlpRounding;
use crate::fxp::QFormat;

/// One K-means run scored against the golden run on the same data.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KMeansRun {
    pub seed: u64,
    pub config: NumericConfig,
    pub n_it: usize,
    pub error_rate: f64,
    pub cmse: f64,
    /// Wall time of this run alone; excluded from comparisons.
    pub runtime_s: f64,
}

/// Every configuration on every seed. Seed `s` drives both the data set and
/// the initial centroids; seeds run in parallel on the current rayon pool.
pub fn kmeans_runs(
    configs: &[NumericConfig],
    seeds: &[u64],
    ds_cfg: &DatasetConfig,
    km_cfg: &KMeansConfig,
    matching: Matching,
) -> Result<Vec<KMeansRun>, KernelError> {
    let per_seed: Vec<Result<Vec<KMeansRun>, KernelError>> = seeds
        .par_iter()
        .map(|&seed| {
            let ds = gen_dataset(ds_cfg, seed)?;
            let cfg = KMeansConfig { init_seed: seed, ..*km_cfg };
            let golden = run_kmeans(&NumericConfig::Golden, &ds, &cfg)?;
            configs
                .iter()
                .map(|nc| {
                    let t = Instant::now();
                    let r = run_kmeans(nc, &ds, &cfg)?;
                    let runtime_s = t.elapsed().as_secs_f64();
                    let m = kmeans_metrics(&r, &golden, matching)?;
                    Ok(KMeansRun {
                        seed,
                        config: *nc,
                        n_it: r.n_it,
                        error_rate: m.error_rate.unwrap_or(f64::NAN),
                        cmse: m.cmse.unwrap_or(f64::NAN),
                        runtime_s,
                    })
                })
                .collect()
        })
        .collect();
    let mut out = Vec::new();
    for runs in per_seed {
        out.extend(runs?);
    }
    Ok(out)
}

/// Median of the finite values; the mean of the middle pair for even counts.
pub fn median(xs: impl IntoIterator<Item = f64>) -> Option<f64> {
    let mut v: Vec<f64> = xs.into_iter().filter(|x| x.is_finite()).collect();
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let h = v.len() / 2;
    Some(if v.len() % 2 == 1 { v[h] } else { (v[h - 1] + v[h]) / 2.0 })
}

/// Per-seed ratio of `num`'s to `den`'s centroid error, for seeds where both
/// ran.
pub fn cmse_ratios(runs: &[KMeansRun], num: &NumericConfig, den: &NumericConfig) -> Vec<f64> {
    runs.iter()
        .filter(|r| r.config == *num)
        .filter_map(|a| runs.iter().find(|b| b.seed == a.seed && b.config == *den).map(|b| a.cmse / b.cmse))
        .collect()
}

/// Fixed and floating-point FFT error at one total width.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FftRow {
    pub width: u32,
    pub fixed: NumericConfig,
    pub fixed_mse: f64,
    /// Best exponent/mantissa split at this width.
    pub float: ExponentChoice,
}

/// The fixed-point input format of a `width`-bit transform: one integer bit
/// holds the unit disk, guard bits are added per stage.
pub fn fft_fixed_config(width: u32) -> Result<NumericConfig, KernelError> {
    QFormat::new(1, width as i32 - 1)
        .map(NumericConfig::fixed)
        .map_err(|e| KernelError::Config(format!("width {width}: {e}")))
}

/// Mean FFT error per width for guarded fixed point and for the best float
/// split. Widths run in parallel on the current rayon pool.
pub fn fft_widths(widths: &[u32], rounding: FlpRounding, inputs: &[Vec<Cpx<f64>>]) -> Result<Vec<FftRow>, KernelError> {
    widths
        .par_iter()
        .map(|&width| {
            let fixed = fft_fixed_config(width)?;
            Ok(FftRow {
                width,
                fixed,
                fixed_mse: mean_fft_mse(&fixed, FftScaling::GuardBits, inputs)?,
                float: exponent_search(width, rounding, inputs)?,
            })
        })
        .collect()
}

/// `count` unit-disk inputs of length `n` and the per-width comparison.
pub fn fft_study(widths: &[u32], n: usize, count: usize, seed: u64) -> Result<Vec<FftRow>, KernelError> {
    fft_widths(widths, FlpRounding::Nearest, &unit_disk_inputs(n, count, seed))
}
