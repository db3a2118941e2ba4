use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::KernelError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DatasetConfig {
    pub k: usize,
    pub n_data: usize,
    /// Half-width of the uniform entries of the covariance factor `A`.
    pub cov_scale: f64,
    /// Half-width of the square holding means and points.
    pub half_width: f64,
}

impl Default for DatasetConfig {
    fn default() -> Self {
        Self { k: 15, n_data: 15_000, cov_scale: 0.15, half_width: std::f64::consts::SQRT_2 }
    }
}

/// Points drawn from a Gaussian mixture inside a square.
#[derive(Debug, Clone, PartialEq)]
pub struct KMeansDataset {
    pub points: Vec<[f64; 2]>,
    /// Index of the mixture component each point was drawn from.
    pub true_labels: Vec<usize>,
    pub true_centroids: Vec<[f64; 2]>,
    pub seed: u64,
}

/// `k` means uniform in the square, one covariance `A·Aᵀ` per component
/// with `A` uniform in `±cov_scale`, components chosen uniformly per point.
/// Points falling outside the square are redrawn from the same component.
pub fn gen_dataset(cfg: &DatasetConfig, seed: u64) -> Result<KMeansDataset, KernelError> {
    if cfg.k == 0 || cfg.n_data < cfg.k {
        return Err(KernelError::Config(format!("need 1 <= k <= n_data, got k={} n_data={}", cfg.k, cfg.n_data)));
    }
    if !(cfg.cov_scale >= 0.0 && cfg.half_width > 0.0) {
        return Err(KernelError::Config("cov_scale must be >= 0 and half_width > 0".into()));
    }
    let h = cfg.half_width;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let means: Vec<[f64; 2]> = (0..cfg.k).map(|_| [rng.random_range(-h..=h), rng.random_range(-h..=h)]).collect();
    let factors: Vec<[[f64; 2]; 2]> = (0..cfg.k)
        .map(|_| {
            let mut a = [[0.0; 2]; 2];
            for row in &mut a {
                for v in row.iter_mut() {
                    *v = if cfg.cov_scale > 0.0 { rng.random_range(-cfg.cov_scale..=cfg.cov_scale) } else { 0.0 };
                }
            }
            a
        })
        .collect();
    let mut points = Vec::with_capacity(cfg.n_data);
    let mut true_labels = Vec::with_capacity(cfg.n_data);
    for _ in 0..cfg.n_data {
        let c = rng.random_range(0..cfg.k);
        let (m, a) = (means[c], factors[c]);
        let p = loop {
            let z0: f64 = rng.sample(StandardNormal);
            let z1: f64 = rng.sample(StandardNormal);
            let p = [m[0] + a[0][0] * z0 + a[0][1] * z1, m[1] + a[1][0] * z0 + a[1][1] * z1];
            if p.iter().all(|v| v.abs() <= h) {
                break p;
            }
        };
        points.push(p);
        true_labels.push(c);
    }
    Ok(KMeansDataset { points, true_labels, true_centroids: means, seed })
}
