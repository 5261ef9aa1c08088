//! Geometry of p-convex bodies: gauges, sign balancing, and sampled
//! estimates of how much of the Euclidean ball `A(B_p^N)` contains.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::certify::ln_constant_cp;
use crate::decode::{decode_lp, SolveOptions};
use crate::ensembles::{dot, sphere_point, MeasurementMatrix};
use crate::error::{Error, Result};
use crate::metrics::{l2_norm, pth_power_sum, quasinorm_unchecked};
use crate::rng::stream_rng;

/// Slack in [`check_p_subadditivity`].
pub const SUBADDITIVITY_SLACK: f64 = 1e-10;

/// Relative slack applied to the bound in [`d1_gap_check`].
pub const D1_TOLERANCE: f64 = 1e-6;

fn check_p(p: f64) -> Result<()> {
    if p > 0.0 && p <= 1.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("exponent p must lie in (0, 1], got {p}")))
    }
}

/// Gauge of the unit p-ball, i.e. the p-quasinorm.
pub fn gauge_bp(x: &[f64], p: f64) -> Result<f64> {
    check_p(p)?;
    Ok(quasinorm_unchecked(x, p))
}

/// `‖x+y‖_p^p ≤ ‖x‖_p^p + ‖y‖_p^p + 1e-10`.
pub fn check_p_subadditivity(x: &[f64], y: &[f64], p: f64) -> Result<bool> {
    check_p(p)?;
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch(format!(
            "vectors have lengths {} and {}",
            x.len(),
            y.len()
        )));
    }
    let sum: Vec<f64> = x.iter().zip(y).map(|(a, b)| a + b).collect();
    Ok(pth_power_sum(&sum, p) <= pth_power_sum(x, p) + pth_power_sum(y, p) + SUBADDITIVITY_SLACK)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignAssignment {
    pub signs: Vec<i8>,
    pub achieved_norm: f64,
}

/// Greedy signs: `ε₁ = +1`, then each `ε_k` minimizes the running
/// `‖Σ_{i≤k} ε_i x_i‖₂` (ties go to `+1`). Since
/// `min(‖s+x‖², ‖s−x‖²) ≤ ‖s‖² + ‖x‖²`, the result satisfies
/// `achieved_norm² ≤ Σ‖x_i‖₂²`.
pub fn balance_signs(points: &[Vec<f64>]) -> Result<SignAssignment> {
    let first = points
        .first()
        .ok_or_else(|| Error::invalid("balance_signs needs at least one point"))?;
    let n = first.len();
    if let Some(bad) = points.iter().position(|x| x.len() != n) {
        return Err(Error::DimensionMismatch(format!(
            "point {bad} has length {}, expected {n}",
            points[bad].len()
        )));
    }
    let mut sum = first.clone();
    let mut signs = Vec::with_capacity(points.len());
    signs.push(1i8);
    for x in &points[1..] {
        // ‖s ± x‖² = ‖s‖² ± 2⟨s,x⟩ + ‖x‖²
        let sign: i8 = if dot(&sum, x) > 0.0 { -1 } else { 1 };
        let c = f64::from(sign);
        sum.iter_mut().zip(x).for_each(|(s, v)| *s += c * v);
        signs.push(sign);
    }
    Ok(SignAssignment {
        signs,
        achieved_norm: l2_norm(&sum),
    })
}

/// One sampled direction `u` of [`lq_empirical`] / [`d1_gap_check`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DirectionMeasurement {
    pub index: usize,
    /// `‖u‖₂`, which should be 1.
    pub u_norm_check: f64,
    /// `‖Δ_p(u)‖_p`.
    pub preimage_quasinorm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LqEmpirical {
    pub alpha_hat: f64,
    pub directions: usize,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub per_direction: Option<Vec<DirectionMeasurement>>,
}

impl LqEmpirical {
    /// `index,u_norm_check,preimage_quasinorm` rows (empty body when the
    /// per-direction record was not kept).
    pub fn per_direction_csv(&self) -> String {
        let mut out = String::from("index,u_norm_check,preimage_quasinorm\n");
        for d in self.per_direction.iter().flatten() {
            out.push_str(&format!("{},{},{}\n", d.index, d.u_norm_check, d.preimage_quasinorm));
        }
        out
    }
}

/// Unit direction number `index` of the stream `seed`.
pub fn sample_direction(m: usize, seed: u64, index: usize) -> Vec<f64> {
    sphere_point(&mut stream_rng(seed, &[index as u64]), m)
}

fn preimage_norms(
    a: &MeasurementMatrix,
    p: f64,
    directions: usize,
    seed: u64,
    opts: &SolveOptions,
) -> Result<Vec<DirectionMeasurement>> {
    check_p(p)?;
    if directions == 0 {
        return Err(Error::invalid("direction count must be positive"));
    }
    let opts = SolveOptions { p, ..*opts };
    opts.validate()?;
    (0..directions)
        .into_par_iter()
        .map(|index| {
            let u = sample_direction(a.rows(), seed, index);
            let report = decode_lp(a, &u, &opts).map_err(|e| Error::Direction {
                index,
                source: Box::new(e),
            })?;
            Ok(DirectionMeasurement {
                index,
                u_norm_check: l2_norm(&u),
                preimage_quasinorm: report.objective_p,
            })
        })
        .collect()
}

fn max_preimage(rows: &[DirectionMeasurement]) -> f64 {
    rows.iter().map(|d| d.preimage_quasinorm).fold(0.0, f64::max)
}

/// `alpha_hat = 1 / max_u ‖Δ_p(u)‖_p` over `directions` sampled unit
/// vectors `u ∈ R^M`. `opts.p` is replaced by `p`.
pub fn lq_empirical(
    a: &MeasurementMatrix,
    p: f64,
    directions: usize,
    seed: u64,
    opts: &SolveOptions,
) -> Result<LqEmpirical> {
    let rows = preimage_norms(a, p, directions, seed, opts)?;
    let worst = max_preimage(&rows);
    if !(worst > 0.0 && worst.is_finite()) {
        return Err(Error::Divergence(format!(
            "largest sampled preimage quasinorm is {worst}"
        )));
    }
    Ok(LqEmpirical {
        alpha_hat: 1.0 / worst,
        directions,
        seed,
        per_direction: Some(rows),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct D1GapRecord {
    pub p: f64,
    pub d1_conv_hat: f64,
    pub d1_p_hat: f64,
    /// `C(p)·d1_conv_hat^(2/p−1)`; infinite when it exceeds `f64::MAX`.
    pub bound: f64,
    pub violated: bool,
    pub tol: f64,
    /// Column scale applied so that `A(B_1^N) ⊆ B_2^M`.
    pub scale: f64,
}

/// Sampled check of `d₁(A(B_p)) ≤ C(p)·d₁(A(B_1))^(2/p−1)` after scaling
/// `A` to unit maximal column norm. Both estimates use the same
/// directions. The comparison is done in logarithms because `C(p)`
/// overflows for small `p`.
pub fn d1_gap_check(
    a: &MeasurementMatrix,
    p: f64,
    directions: usize,
    seed: u64,
    opts: &SolveOptions,
) -> Result<D1GapRecord> {
    check_p(p)?;
    let peak = a.max_column_norm();
    if !(peak > 0.0) {
        return Err(Error::invalid("matrix has no nonzero column"));
    }
    let scale = 1.0 / peak;
    let scaled = a.scaled(scale);
    let d1_conv_hat = max_preimage(&preimage_norms(&scaled, 1.0, directions, seed, opts)?);
    let d1_p_hat = if p == 1.0 {
        d1_conv_hat
    } else {
        max_preimage(&preimage_norms(&scaled, p, directions, seed, opts)?)
    };
    let ln_bound = ln_constant_cp(p) + (2.0 / p - 1.0) * d1_conv_hat.ln();
    let violated = d1_p_hat.ln() > ln_bound + D1_TOLERANCE.ln_1p();
    Ok(D1GapRecord {
        p,
        d1_conv_hat,
        d1_p_hat,
        bound: ln_bound.exp(),
        violated,
        tol: D1_TOLERANCE,
        scale,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauge_examples() {
        assert_eq!(gauge_bp(&[0.0; 3], 0.5).unwrap(), 0.0);
        assert!((gauge_bp(&[1.0, 0.0, 0.0], 0.3).unwrap() - 1.0).abs() < 1e-15);
        assert!(gauge_bp(&[1.0], 1.5).is_err());
    }

    #[test]
    fn subadditivity_examples() {
        let x = [1.0, 0.0, 2.0, 0.0];
        let y = [0.0, 3.0, 0.0, 0.5];
        let sum: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a + b).collect();
        let p = 0.4;
        let gap = pth_power_sum(&x, p) + pth_power_sum(&y, p) - pth_power_sum(&sum, p);
        assert!(gap.abs() < 1e-12);
        assert!(check_p_subadditivity(&x, &y, p).unwrap());
        assert!(check_p_subadditivity(&x, &x, 0.7).unwrap());
        assert!(check_p_subadditivity(&x, &y[..2], p).is_err());
    }

    #[test]
    fn sign_examples() {
        let one = balance_signs(&[vec![0.6, 0.0]]).unwrap();
        assert_eq!(one.signs, vec![1]);
        assert!((one.achieved_norm - 0.6).abs() < 1e-15);

        let pair = balance_signs(&[vec![1.0, 0.0], vec![1.0, 0.0]]).unwrap();
        assert_eq!(pair.signs, vec![1, -1]);
        assert_eq!(pair.achieved_norm, 0.0);

        let basis: Vec<Vec<f64>> = (0..5)
            .map(|i| (0..7).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        assert_eq!(balance_signs(&basis).unwrap().achieved_norm, 5f64.sqrt());
        assert!(balance_signs(&[]).is_err());
    }

    #[test]
    fn orthonormal_lq_is_at_most_one() {
        let a = MeasurementMatrix::identity(4).unwrap();
        let est = lq_empirical(&a, 1.0, 20, 3, &SolveOptions::with_p(1.0)).unwrap();
        assert!(est.alpha_hat <= 1.0 + 1e-6);
        assert!(est.alpha_hat >= 0.5 - 1e-6);
        let rows = est.per_direction.as_ref().unwrap();
        assert!(rows.iter().all(|d| (d.u_norm_check - 1.0).abs() < 1e-12));
        assert_eq!(est.per_direction_csv().lines().count(), 21);
    }

    #[test]
    fn p_one_gap_is_identity() {
        let a = crate::ensembles::gen_gaussian(4, 8, 5).unwrap();
        let mut opts = SolveOptions::with_p(1.0);
        opts.max_inner = 20;
        let rec = d1_gap_check(&a, 1.0, 10, 1, &opts).unwrap();
        assert!((rec.bound - rec.d1_conv_hat).abs() <= 1e-12 * rec.bound);
        assert!(!rec.violated);
    }

    #[test]
    fn rejects_bad_arguments() {
        let a = MeasurementMatrix::identity(3).unwrap();
        let opts = SolveOptions::default();
        assert!(lq_empirical(&a, 1.0, 0, 0, &opts).is_err());
        assert!(lq_empirical(&a, 0.0, 3, 0, &opts).is_err());
        assert!(d1_gap_check(&a, 1.2, 3, 0, &opts).is_err());
    }
}
