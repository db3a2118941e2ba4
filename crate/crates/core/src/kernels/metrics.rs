use serde::{Deserialize, Serialize};

use super::{KMeansResult, KernelError};

/// How result clusters are paired with reference clusters.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Matching {
    /// Repeatedly pair the closest remaining centroids.
    #[default]
    Greedy,
    /// Minimum total squared distance.
    Hungarian,
}

/// Accuracy and cost figures of one run against its reference.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub cmse: Option<f64>,
    pub error_rate: Option<f64>,
    pub mse: Option<f64>,
    pub n_it: Option<usize>,
    pub cost: Option<f64>,
    pub energy: Option<f64>,
}

fn sq_dist(a: &[f64; 2], b: &[f64; 2]) -> f64 {
    (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)
}

/// `perm[j]` is the reference cluster paired with result cluster `j`.
pub fn match_centroids(result: &[[f64; 2]], reference: &[[f64; 2]], m: Matching) -> Result<Vec<usize>, KernelError> {
    if result.len() != reference.len() {
        return Err(KernelError::ClusterCount(result.len(), reference.len()));
    }
    let k = result.len();
    let cost: Vec<Vec<f64>> = result.iter().map(|r| reference.iter().map(|g| sq_dist(r, g)).collect()).collect();
    Ok(match m {
        Matching::Greedy => {
            let mut pairs: Vec<(f64, usize, usize)> =
                (0..k).flat_map(|i| (0..k).map(move |j| (i, j))).map(|(i, j)| (cost[i][j], i, j)).collect();
            pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
            let mut perm = vec![usize::MAX; k];
            let mut taken = vec![false; k];
            for (_, i, j) in pairs {
                if perm[i] == usize::MAX && !taken[j] {
                    perm[i] = j;
                    taken[j] = true;
                }
            }
            perm
        }
        Matching::Hungarian => hungarian(&cost),
    })
}

/// Minimum-cost perfect assignment of rows to columns of a square matrix.
fn hungarian(cost: &[Vec<f64>]) -> Vec<usize> {
    let n = cost.len();
    // 1-based potentials; column 0 is a virtual start
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut col_row = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for row in 1..=n {
        col_row[0] = row;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = col_row[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[col_row[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if col_row[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            col_row[j0] = col_row[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut perm = vec![0; n];
    for j in 1..=n {
        perm[col_row[j] - 1] = j - 1;
    }
    perm
}

/// Centroid MSE (mean squared distance of paired centroids) and error rate
/// (share of points whose paired cluster differs from the reference label).
pub fn kmeans_metrics(r: &KMeansResult, golden: &KMeansResult, m: Matching) -> Result<MetricReport, KernelError> {
    if r.labels.len() != golden.labels.len() {
        return Err(KernelError::Length(r.labels.len(), golden.labels.len()));
    }
    let perm = match_centroids(&r.centroids, &golden.centroids, m)?;
    let k = perm.len() as f64;
    let cmse = r.centroids.iter().enumerate().map(|(j, c)| sq_dist(c, &golden.centroids[perm[j]])).sum::<f64>() / k;
    let wrong = r.labels.iter().zip(&golden.labels).filter(|(&a, &b)| perm[a] != b).count();
    let error_rate = if r.labels.is_empty() { 0.0 } else { wrong as f64 / r.labels.len() as f64 };
    Ok(MetricReport { cmse: Some(cmse), error_rate: Some(error_rate), n_it: Some(r.n_it), ..Default::default() })
}
