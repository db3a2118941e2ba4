//! Benchmark kernels generic over [`Arithmetic`](crate::arith::Arithmetic):
//! 2-D Lloyd K-means and radix-2 FFT, with their data generators and error
//! metrics.

pub mod dataset;
pub mod fft;
pub mod kmeans;
pub mod metrics;
pub mod study;

pub use dataset::{gen_dataset, DatasetConfig, KMeansDataset};
pub use fft::{
    direct_dft, exponent_search, fft_dit, fft_mse, fft_recursive, mean_fft_mse, run_fft, unit_disk_inputs, Cpx,
    ExponentChoice, FftPlan, FftScaling,
};
pub use kmeans::{distance_comp, init_indices, lloyd_kmeans, run_kmeans, KMeansConfig, KMeansResult};
pub use metrics::{kmeans_metrics, match_centroids, Matching, MetricReport};
pub use study::{cmse_ratios, fft_fixed_config, fft_study, fft_widths, kmeans_runs, median, FftRow, KMeansRun};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KernelError {
    #[error("cluster count mismatch: {0} vs {1}")]
    ClusterCount(usize, usize),
    #[error("length mismatch: {0} vs {1}")]
    Length(usize, usize),
    #[error("transform size {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("invalid kernel configuration: {0}")]
    Config(String),
}

/// Runs `$body` with `$a` bound to the arithmetic of a
/// [`NumericConfig`](crate::arith::NumericConfig).
#[macro_export]
macro_rules! with_arithmetic {
    ($nc:expr, |$a:ident| $body:expr) => {
        match *$nc {
            $crate::arith::NumericConfig::Golden => {
                let $a = $crate::arith::Golden::<f64>::new();
                $body
            }
            $crate::arith::NumericConfig::Float(fmt) => {
                let $a = $crate::arith::Minifloat::new(fmt);
                $body
            }
            $crate::arith::NumericConfig::Fixed { fmt, rounding, overflow } => {
                let $a = $crate::arith::Fixed::new(fmt, rounding, overflow);
                $body
            }
        }
    };
}
