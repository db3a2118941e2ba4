use num_traits::Zero;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{KMeansDataset, KernelError};
use crate::arith::{Arithmetic, NumericConfig};
use crate::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KMeansConfig {
    pub k: usize,
    /// Stop once the total distance changes by at most this much.
    pub acc_target: f64,
    pub max_iter: usize,
    /// Seed of the initial centroid choice.
    pub init_seed: u64,
}

impl Default for KMeansConfig {
    fn default() -> Self {
        Self { k: 15, acc_target: 1e-4, max_iter: 150, init_seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansResult {
    pub centroids: Vec<[f64; 2]>,
    pub labels: Vec<usize>,
    /// Iterations executed.
    pub n_it: usize,
    /// Sum of the labelling distances of the last iteration.
    pub err: f64,
    /// `err` after every iteration.
    pub err_trace: Vec<f64>,
}

/// `k` distinct point indices, uniform and seed-fixed.
pub fn init_indices(n_points: usize, k: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rand::seq::index::sample(&mut rng, n_points, k).into_vec()
}

/// Squared distance accumulated one dimension at a time with one
/// subtracter, one multiplier and one adder, all in `a`.
pub fn distance_comp<A: Arithmetic>(a: &A, x: &[A::Value; 2], c: &[A::Value; 2]) -> A::Value {
    let mut acc = a.zero();
    for d in 0..2 {
        let diff = a.sub(&x[d], &c[d]);
        let sq = a.mul(&diff, &diff);
        acc = a.add(&acc, &sq);
    }
    acc
}

/// Lloyd iterations with every distance computed in `a`.
///
/// Points and centroids are encoded in `a`. Per-cluster sums and counts are
/// kept exactly, each new centroid is the exact mean encoded into `a`, and a
/// cluster that loses all its points takes its (zero) sum as centroid. The
/// loop stops when the total labelling distance moves by at most
/// `acc_target` or after `max_iter` iterations.
pub fn lloyd_kmeans<A: Arithmetic>(
    a: &A,
    points: &[[f64; 2]],
    init: &[usize],
    acc_target: f64,
    max_iter: usize,
) -> Result<KMeansResult, KernelError> {
    let k = init.len();
    if k == 0 || k > points.len() || init.iter().any(|&i| i >= points.len()) {
        return Err(KernelError::Config(format!("invalid initial centroids for {} points", points.len())));
    }
    let xs: Vec<[A::Value; 2]> = points.iter().map(|p| [a.from_f64(p[0]), a.from_f64(p[1])]).collect();
    let exact: Vec<[Rational; 2]> = xs.iter().map(|x| [a.to_rational(&x[0]), a.to_rational(&x[1])]).collect();
    let mut c: Vec<[A::Value; 2]> = init.iter().map(|&i| xs[i].clone()).collect();

    // sums[i], counts[i] always describe the current labelling
    let mut sums: Vec<[Rational; 2]> = vec![[Rational::zero(), Rational::zero()]; k];
    let mut counts = vec![0u64; k];
    let mut labels: Vec<Option<usize>> = vec![None; points.len()];
    let mut err = f64::INFINITY;
    let mut err_trace = Vec::new();
    let mut cpt = 0;
    loop {
        let old_err = err;
        err = 0.0;
        for (d, x) in xs.iter().enumerate() {
            let mut best = 0;
            let mut min_distance = distance_comp(a, x, &c[0]);
            for (i, ci) in c.iter().enumerate().skip(1) {
                let dist = distance_comp(a, x, ci);
                if a.less_than(&dist, &min_distance) {
                    min_distance = dist;
                    best = i;
                }
            }
            err += a.to_f64(&min_distance);
            if labels[d] != Some(best) {
                if let Some(old) = labels[d] {
                    counts[old] -= 1;
                    for j in 0..2 {
                        sums[old][j] -= &exact[d][j];
                    }
                }
                counts[best] += 1;
                for j in 0..2 {
                    sums[best][j] += &exact[d][j];
                }
                labels[d] = Some(best);
            }
        }
        for i in 0..k {
            for j in 0..2 {
                let v = if counts[i] == 0 {
                    sums[i][j].clone()
                } else {
                    &sums[i][j] / Rational::from_integer(counts[i].into())
                };
                c[i][j] = a.from_rational(&v);
            }
        }
        cpt += 1;
        err_trace.push(err);
        if (err - old_err).abs() <= acc_target || cpt >= max_iter {
            break;
        }
    }
    Ok(KMeansResult {
        centroids: c.iter().map(|ci| [a.to_f64(&ci[0]), a.to_f64(&ci[1])]).collect(),
        labels: labels.into_iter().map(|l| l.expect("every point labelled")).collect(),
        n_it: cpt,
        err,
        err_trace,
    })
}

/// K-means on `ds` in the number system `nc`, initialized from
/// `cfg.init_seed`.
pub fn run_kmeans(nc: &NumericConfig, ds: &KMeansDataset, cfg: &KMeansConfig) -> Result<KMeansResult, KernelError> {
    if cfg.k == 0 || cfg.k > ds.points.len() {
        return Err(KernelError::Config(format!("k = {} with {} points", cfg.k, ds.points.len())));
    }
    let init = init_indices(ds.points.len(), cfg.k, cfg.init_seed);
    crate::with_arithmetic!(nc, |a| lloyd_kmeans(&a, &ds.points, &init, cfg.acc_target, cfg.max_iter))
}
