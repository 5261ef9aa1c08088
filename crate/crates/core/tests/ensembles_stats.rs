//! Distributional checks on the random generators.

use lpdecode::ensembles::{gen_gaussian, gen_sparse_signal, gen_uniform_sphere};
use statrs::distribution::{Beta, ChiSquared, ContinuousCDF, Normal};

/// Two-sided Kolmogorov–Smirnov statistic of `sample` against `cdf`.
fn ks_statistic(mut sample: Vec<f64>, cdf: impl Fn(f64) -> f64) -> f64 {
    sample.sort_by(f64::total_cmp);
    let n = sample.len() as f64;
    sample
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

/// Asymptotic 0.1% critical value of the KS statistic.
fn ks_critical(n: usize) -> f64 {
    1.95 / (n as f64).sqrt()
}

#[test]
fn gaussian_entries_are_normal_with_variance_one_over_m() {
    let m = 40;
    let a = gen_gaussian(m, 250, 17).unwrap();
    let scaled: Vec<f64> = a.as_slice().iter().map(|v| v * (m as f64).sqrt()).collect();
    let n = scaled.len();
    let normal = Normal::new(0.0, 1.0).unwrap();
    let d = ks_statistic(scaled, |x| normal.cdf(x));
    assert!(d < ks_critical(n), "KS statistic {d}");
}

#[test]
fn sphere_coordinates_follow_the_beta_law() {
    // For u uniform on the sphere in R^M, u₁² ~ Beta(1/2, (M−1)/2).
    let m = 7;
    let a = gen_uniform_sphere(m, 4000, 5).unwrap();
    let sample: Vec<f64> = (0..a.cols()).map(|j| a.get(0, j).powi(2)).collect();
    let beta = Beta::new(0.5, (m as f64 - 1.0) / 2.0).unwrap();
    let d = ks_statistic(sample, |x| beta.cdf(x));
    assert!(d < ks_critical(4000), "KS statistic {d}");

    let signs = (0..a.cols()).filter(|&j| a.get(3, j) > 0.0).count() as f64;
    assert!((signs / 4000.0 - 0.5).abs() < 0.05);
}

#[test]
fn sparse_supports_are_uniform() {
    let (n, s, draws) = (20, 3, 4000);
    let mut counts = vec![0.0; n];
    for seed in 0..draws {
        let x = gen_sparse_signal(n, s, seed).unwrap();
        for (i, v) in x.iter().enumerate() {
            if *v != 0.0 {
                counts[i] += 1.0;
            }
        }
    }
    let expected = (draws as f64) * s as f64 / n as f64;
    let chi2: f64 = counts.iter().map(|c| (c - expected).powi(2) / expected).sum();
    let critical = ChiSquared::new((n - 1) as f64).unwrap().inverse_cdf(0.999);
    assert!(chi2 < critical, "chi-square {chi2} ≥ {critical}");
}
