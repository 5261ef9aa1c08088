//! Restricted isometry estimates on small matrices.

use lpdecode::ensembles::{gen_gaussian, gen_uniform_sphere, MeasurementMatrix};
use lpdecode::rip::{rip_delta_exact, rip_delta_mc, rip_profile, support_deviation};

/// δ_S by brute force over all supports, written independently of the
/// library's combination walker.
fn brute_delta(a: &MeasurementMatrix, s: usize) -> f64 {
    let n = a.cols();
    (0u32..1 << n)
        .filter(|mask| mask.count_ones() as usize == s)
        .map(|mask| {
            let support: Vec<usize> = (0..n).filter(|j| mask >> j & 1 == 1).collect();
            support_deviation(a, &support)
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

#[test]
fn exact_matches_bitmask_enumeration() {
    let a = gen_gaussian(5, 9, 3).unwrap();
    for s in 1..=5 {
        assert!((rip_delta_exact(&a, s).unwrap() - brute_delta(&a, s)).abs() < 1e-14);
    }
}

#[test]
fn monte_carlo_never_exceeds_exhaustive() {
    for seed in 0..30u64 {
        let a = if seed % 2 == 0 {
            gen_gaussian(4, 8, seed).unwrap()
        } else {
            gen_uniform_sphere(4, 8, seed).unwrap()
        };
        for s in 1..=3 {
            let exact = rip_delta_exact(&a, s).unwrap();
            let mc = rip_delta_mc(&a, s, 40, seed).unwrap();
            assert!(mc.delta_lower <= exact + 1e-12);
        }
    }
}

#[test]
fn profiles_are_nondecreasing_and_seeded() {
    let a = gen_gaussian(12, 30, 4).unwrap();
    let profile = rip_profile(&a, 12, 60, 2).unwrap();
    assert_eq!(profile.len(), 12);
    assert!(profile.windows(2).all(|w| w[1].delta_lower >= w[0].delta_lower));
    assert_eq!(profile, rip_profile(&a, 12, 60, 2).unwrap());
}

#[test]
fn estimates_do_not_depend_on_thread_count() {
    let a = gen_gaussian(10, 40, 8).unwrap();
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| rip_profile(&a, 6, 200, 5).unwrap())
    };
    assert_eq!(run(1), run(3));
}
