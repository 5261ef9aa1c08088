//! Restricted isometry constants.
//!
//! For a column subset `T` the deviation is
//! `max(λ_max(A_Tᵀ A_T) − 1, 1 − λ_min(A_Tᵀ A_T))` and `δ_S` is its maximum
//! over all `|T| = S`. The exhaustive route enumerates every subset; the
//! Monte-Carlo route samples subsets and therefore only yields a lower
//! bound.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ensembles::{random_support, MeasurementMatrix};
use crate::error::{Error, Result};
use crate::rng::stream_rng;

/// Default limit on the number of submatrices visited by
/// [`rip_delta_exact`].
pub const DEFAULT_EXHAUSTIVE_CAP: u64 = 2_000_000;

/// Default Monte-Carlo trial count per sparsity level.
pub const DEFAULT_MC_TRIALS: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RipMethod {
    MonteCarlo,
    Exhaustive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RipEstimate {
    #[serde(rename = "S")]
    pub s: usize,
    pub delta_lower: f64,
    pub trials: usize,
    pub method: RipMethod,
    pub seed: u64,
}

fn check_sparsity(a: &MeasurementMatrix, s: usize) -> Result<()> {
    let limit = a.rows().min(a.cols());
    if s == 0 || s > limit {
        return Err(Error::invalid(format!(
            "sparsity S = {s} must satisfy 1 ≤ S ≤ min(M, N) = {limit}"
        )));
    }
    Ok(())
}

/// Gram matrix `A_Tᵀ A_T` of the columns in `support`.
pub fn support_gram(a: &MeasurementMatrix, support: &[usize]) -> DMatrix<f64> {
    let s = support.len();
    let mut gram = DMatrix::zeros(s, s);
    let mut picked = vec![0.0; s];
    for i in 0..a.rows() {
        let row = a.row(i);
        for (v, &j) in picked.iter_mut().zip(support) {
            *v = row[j];
        }
        for c in 0..s {
            let vc = picked[c];
            if vc == 0.0 {
                continue;
            }
            for r in c..s {
                gram[(r, c)] += picked[r] * vc;
            }
        }
    }
    for c in 0..s {
        for r in c + 1..s {
            gram[(c, r)] = gram[(r, c)];
        }
    }
    gram
}

/// Extreme eigenvalues `(λ_min, λ_max)` of a symmetric matrix.
pub(crate) fn extreme_eigenvalues(sym: DMatrix<f64>) -> (f64, f64) {
    if sym.nrows() == 1 {
        let v = sym[(0, 0)];
        return (v, v);
    }
    let eig = sym.symmetric_eigenvalues();
    let lo = eig.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = eig.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (lo, hi)
}

/// Isometry deviation of the column subset `support`.
pub fn support_deviation(a: &MeasurementMatrix, support: &[usize]) -> f64 {
    let (lo, hi) = extreme_eigenvalues(support_gram(a, support));
    (hi - 1.0).max(1.0 - lo)
}

/// `C(n, k)`, saturating at `u128::MAX`.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// Advance `comb` (strictly increasing indices below `n`) to the next
/// combination in lexicographic order. Returns `false` after the last one.
pub(crate) fn next_combination(comb: &mut [usize], n: usize) -> bool {
    let k = comb.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if comb[i] < n - k + i {
            comb[i] += 1;
            for j in i + 1..k {
                comb[j] = comb[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Exact `δ_S` by enumerating all `C(N, S)` column subsets.
pub fn rip_delta_exact(a: &MeasurementMatrix, s: usize) -> Result<f64> {
    rip_delta_exact_capped(a, s, DEFAULT_EXHAUSTIVE_CAP)
}

pub fn rip_delta_exact_capped(a: &MeasurementMatrix, s: usize, cap: u64) -> Result<f64> {
    check_sparsity(a, s)?;
    let count = binomial(a.cols(), s);
    if count > cap as u128 {
        return Err(Error::TooLarge {
            what: "column subset enumeration",
            count,
            cap: cap as u128,
            hint: "use rip_delta_mc for a Monte-Carlo lower bound",
        });
    }
    let mut comb: Vec<usize> = (0..s).collect();
    let mut worst = f64::NEG_INFINITY;
    loop {
        worst = worst.max(support_deviation(a, &comb));
        if !next_combination(&mut comb, a.cols()) {
            break;
        }
    }
    Ok(worst)
}

/// Monte-Carlo lower bound on `δ_S` from `trials` uniformly random
/// supports. Trial `t` draws its support from stream `(seed, S, t)`.
pub fn rip_delta_mc(
    a: &MeasurementMatrix,
    s: usize,
    trials: usize,
    seed: u64,
) -> Result<RipEstimate> {
    check_sparsity(a, s)?;
    if trials == 0 {
        return Err(Error::invalid("Monte-Carlo trial count must be positive"));
    }
    let delta = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = stream_rng(seed, &[s as u64, t as u64]);
            let support = random_support(&mut rng, a.cols(), s);
            support_deviation(a, &support)
        })
        .reduce(|| f64::NEG_INFINITY, f64::max);
    Ok(RipEstimate {
        s,
        delta_lower: delta.max(0.0),
        trials,
        method: RipMethod::MonteCarlo,
        seed,
    })
}

/// Monte-Carlo estimates for `S = 1..=s_max`, made nondecreasing in `S`
/// by a running maximum.
pub fn rip_profile(
    a: &MeasurementMatrix,
    s_max: usize,
    trials: usize,
    seed: u64,
) -> Result<Vec<RipEstimate>> {
    check_sparsity(a, s_max)?;
    let raw = (1..=s_max)
        .map(|s| rip_delta_mc(a, s, trials, seed))
        .collect::<Result<Vec<_>>>()?;
    Ok(monotonize(raw))
}

pub(crate) fn monotonize(mut profile: Vec<RipEstimate>) -> Vec<RipEstimate> {
    let mut running = f64::NEG_INFINITY;
    for est in &mut profile {
        running = running.max(est.delta_lower);
        est.delta_lower = running;
    }
    profile
}

/// `(S, δ_S)` pairs in the form [`crate::certify::certify_recovery`] expects.
pub fn profile_pairs(profile: &[RipEstimate]) -> Vec<(usize, f64)> {
    profile.iter().map(|e| (e.s, e.delta_lower)).collect()
}
