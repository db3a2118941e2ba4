use precisionlab::arith::{Fixed, NumericConfig};
use precisionlab::fxp::{OverflowMode, QFormat, RoundingModeFxp};
use precisionlab::kernels::{
    direct_dft, fft_dit, fft_recursive, gen_dataset, kmeans_metrics, mean_fft_mse, run_fft, run_kmeans,
    unit_disk_inputs, Cpx, DatasetConfig, FftPlan, FftScaling, KMeansConfig, Matching,
};

fn cfg(s: &str) -> NumericConfig {
    s.parse().unwrap()
}

#[test]
fn golden_fft_is_linear() {
    let xs = unit_disk_inputs(16, 2, 1);
    let sum: Vec<Cpx<f64>> = xs[0].iter().zip(&xs[1]).map(|(a, b)| Cpx::new(a.re + b.re, a.im + b.im)).collect();
    let y = |x: &[Cpx<f64>]| run_fft(&NumericConfig::Golden, FftScaling::GuardBits, x).unwrap();
    let (ya, yb, ys) = (y(&xs[0]), y(&xs[1]), y(&sum));
    for k in 0..16 {
        assert!((ya[k].re + yb[k].re - ys[k].re).abs() < 1e-12);
        assert!((ya[k].im + yb[k].im - ys[k].im).abs() < 1e-12);
    }
}

#[test]
fn every_power_of_two_length_matches_the_dft() {
    for log2n in 1..=6 {
        let n = 1 << log2n;
        for x in unit_disk_inputs(n, 3, log2n as u64) {
            let y = run_fft(&NumericConfig::Golden, FftScaling::GuardBits, &x).unwrap();
            for (a, b) in y.iter().zip(direct_dft(&x)) {
                assert!((a.re - b.re).abs() < 1e-12 && (a.im - b.im).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn iterative_and_recursive_fixed_point_agree_bit_for_bit() {
    for (w, r) in [(8, RoundingModeFxp::Truncate), (12, RoundingModeFxp::NearestEven), (10, RoundingModeFxp::NearestUp)]
    {
        let base = Fixed::new(QFormat::new(1, w - 1).unwrap(), r, OverflowMode::Saturate);
        let plan = FftPlan::guarded(base, 16).unwrap();
        for x in unit_disk_inputs(16, 10, w as u64) {
            let enc = plan.encode(&x);
            assert_eq!(fft_dit(&plan, &enc).unwrap(), fft_recursive(&plan, &enc).unwrap());
        }
    }
}

#[test]
fn wider_fixed_point_fft_is_more_accurate() {
    let inputs = unit_disk_inputs(16, 20, 5);
    let mse: Vec<f64> = (6..=16)
        .map(|w| mean_fft_mse(&cfg(&format!("Q1.{}", w - 1)), FftScaling::GuardBits, &inputs).unwrap())
        .collect();
    assert!(mse.windows(2).all(|p| p[1] < p[0]), "{mse:?}");
}

#[test]
fn kmeans_is_deterministic_per_seed() {
    let ds = gen_dataset(&DatasetConfig { k: 5, n_data: 800, ..Default::default() }, 9).unwrap();
    let km = KMeansConfig { k: 5, init_seed: 4, ..Default::default() };
    for c in ["golden", "Q3.5", "flt<5,2,RN>"] {
        let a = run_kmeans(&cfg(c), &ds, &km).unwrap();
        let b = run_kmeans(&cfg(c), &ds, &km).unwrap();
        assert_eq!(a, b);
        assert!(a.labels.iter().all(|&l| l < 5));
        assert_eq!(a.err_trace.len(), a.n_it);
    }
}

#[test]
fn sixteen_bit_kmeans_tracks_the_reference() {
    let ds = gen_dataset(&DatasetConfig { n_data: 3000, ..Default::default() }, 2).unwrap();
    let km = KMeansConfig { init_seed: 2, ..Default::default() };
    let golden = run_kmeans(&NumericConfig::Golden, &ds, &km).unwrap();
    for c in ["Q3.13", "flt<5,10,RN>"] {
        let r = run_kmeans(&cfg(c), &ds, &km).unwrap();
        let m = kmeans_metrics(&r, &golden, Matching::Hungarian).unwrap();
        assert!(m.error_rate.unwrap() < 0.05, "{c}: {m:?}");
    }
}
