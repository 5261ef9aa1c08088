//! Quasinorms, best S-term approximation errors and reconstruction quality.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Returned by [`snr_db`] when the reconstruction error is below
/// `1e-15·‖x‖₂`.
pub const SNR_CAP_DB: f64 = 300.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuasinormValue {
    pub p: f64,
    pub value: f64,
}

fn check_p(p: f64) -> Result<()> {
    if p > 0.0 && p <= 2.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("exponent p must lie in (0, 2], got {p}")))
    }
}

/// `Σ|x_i|^p`, without the outer root.
pub fn pth_power_sum(x: &[f64], p: f64) -> f64 {
    if p == 1.0 {
        x.iter().map(|v| v.abs()).sum()
    } else if p == 2.0 {
        x.iter().map(|v| v * v).sum()
    } else {
        x.iter()
            .filter(|v| **v != 0.0)
            .map(|v| v.abs().powf(p))
            .sum()
    }
}

/// `(Σ|x_i|^p)^(1/p)`.
pub fn quasinorm(x: &[f64], p: f64) -> Result<f64> {
    check_p(p)?;
    Ok(quasinorm_unchecked(x, p))
}

pub(crate) fn quasinorm_unchecked(x: &[f64], p: f64) -> f64 {
    if p == 2.0 {
        return l2_norm(x);
    }
    let s = pth_power_sum(x, p);
    if p == 1.0 {
        s
    } else {
        s.powf(1.0 / p)
    }
}

pub fn quasinorm_value(x: &[f64], p: f64) -> Result<QuasinormValue> {
    Ok(QuasinormValue {
        p,
        value: quasinorm(x, p)?,
    })
}

pub fn l2_norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub fn l2_distance(x: &[f64], y: &[f64]) -> f64 {
    x.iter()
        .zip(y)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt()
}

/// `‖x − xhat‖₂ / ‖x‖₂`; falls back to the absolute error when `x = 0`.
pub fn relative_l2_error(x: &[f64], xhat: &[f64]) -> f64 {
    let err = l2_distance(x, xhat);
    let scale = l2_norm(x);
    if scale > 0.0 {
        err / scale
    } else {
        err
    }
}

/// Indices sorted by decreasing magnitude, lower index first among ties.
pub fn magnitude_order(x: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&i, &j| x[j].abs().total_cmp(&x[i].abs()).then(i.cmp(&j)));
    idx
}

/// Indices of the `s` largest-magnitude entries, in increasing index order.
pub fn top_s_support(x: &[f64], s: usize) -> Vec<usize> {
    let mut head: Vec<usize> = magnitude_order(x).into_iter().take(s).collect();
    head.sort_unstable();
    head
}

/// `σ_S(x)_{ℓp}`: the p-quasinorm of `x` with its `s` largest-magnitude
/// entries removed. Hard thresholding is optimal for every p > 0.
pub fn best_s_term_error(x: &[f64], s: usize, p: f64) -> Result<f64> {
    check_p(p)?;
    if s > x.len() {
        return Err(Error::invalid(format!(
            "S = {s} exceeds the vector length {}",
            x.len()
        )));
    }
    let tail: Vec<f64> = magnitude_order(x)
        .into_iter()
        .skip(s)
        .map(|i| x[i])
        .collect();
    Ok(quasinorm_unchecked(&tail, p))
}

/// `20·log₁₀(‖x‖₂ / ‖x − xhat‖₂)`, capped at [`SNR_CAP_DB`].
pub fn snr_db(x: &[f64], xhat: &[f64]) -> Result<f64> {
    if x.len() != xhat.len() {
        return Err(Error::DimensionMismatch(format!(
            "signal has length {}, estimate has length {}",
            x.len(),
            xhat.len()
        )));
    }
    let signal = l2_norm(x);
    if signal == 0.0 {
        return Err(Error::invalid("SNR is undefined for a zero reference signal"));
    }
    let err = l2_distance(x, xhat);
    if err < 1e-15 * signal {
        return Ok(SNR_CAP_DB);
    }
    Ok((20.0 * (signal / err).log10()).min(SNR_CAP_DB))
}

/// Indices with `|x_i| > tol·max|x|`.
pub fn support(x: &[f64], rel_tol: f64) -> Vec<usize> {
    let peak = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if peak == 0.0 {
        return Vec::new();
    }
    (0..x.len())
        .filter(|&i| x[i].abs() > rel_tol * peak)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn quasinorm_examples() {
        assert_eq!(quasinorm(&[3.0, 4.0], 2.0).unwrap(), 5.0);
        assert!((quasinorm(&[1.0, 1.0], 0.5).unwrap() - 4.0).abs() < 1e-12);
        for p in [0.1, 0.5, 1.0, 2.0] {
            assert_eq!(quasinorm(&[0.0; 4], p).unwrap(), 0.0);
        }
        assert!(quasinorm(&[1.0], 0.0).is_err());
        assert!(quasinorm(&[1.0], -1.0).is_err());
    }

    #[test]
    fn best_term_examples() {
        let e = best_s_term_error(&[3.0, 1.0, -2.0], 1, 2.0).unwrap();
        assert!((e - 5f64.sqrt()).abs() < 1e-15);
        assert_eq!(best_s_term_error(&[0.0, 2.0, 0.0, -1.0], 2, 0.5).unwrap(), 0.0);
        assert_eq!(best_s_term_error(&[0.0, 2.0, 0.0, -1.0], 3, 0.5).unwrap(), 0.0);
        assert!(best_s_term_error(&[1.0, 2.0], 3, 1.0).is_err());
    }

    #[test]
    fn ties_keep_lower_index() {
        assert_eq!(top_s_support(&[1.0, -1.0, 1.0], 2), vec![0, 1]);
    }

    #[test]
    fn snr_examples() {
        let x = [1.0, 0.0];
        assert!((snr_db(&x, &[1.0, 0.1]).unwrap() - 20.0).abs() < 1e-12);
        assert!((snr_db(&x, &[1.0, 0.5]).unwrap() - 6.0206).abs() < 1e-3);
        assert_eq!(snr_db(&x, &x).unwrap(), SNR_CAP_DB);
        assert!(snr_db(&[0.0, 0.0], &x).is_err());
    }

    #[test]
    fn support_threshold() {
        assert_eq!(support(&[0.0, 1.0, 1e-9, -0.5], 1e-6), vec![1, 3]);
        assert!(support(&[0.0; 3], 1e-6).is_empty());
    }

    fn vec_strategy() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-10.0f64..10.0, 1..24)
    }

    proptest! {
        #[test]
        fn p_power_is_subadditive(pair in (1usize..24).prop_flat_map(|n| (
            prop::collection::vec(-10.0f64..10.0, n),
            prop::collection::vec(-10.0f64..10.0, n),
        )), p in 0.05f64..=1.0) {
            let (x, y) = pair;
            let sum: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a + b).collect();
            let lhs = pth_power_sum(&sum, p);
            let rhs = pth_power_sum(&x, p) + pth_power_sum(&y, p);
            prop_assert!(lhs <= rhs * (1.0 + 1e-12) + 1e-12);

            let quasi = quasinorm(&sum, p).unwrap();
            let bound = 2f64.powf(1.0 / p - 1.0) * (quasinorm(&x, p).unwrap() + quasinorm(&y, p).unwrap());
            prop_assert!(quasi <= bound * (1.0 + 1e-12) + 1e-12);
        }

        #[test]
        fn norm_ordering(x in vec_strategy()) {
            let l1 = quasinorm(&x, 1.0).unwrap();
            let l2 = quasinorm(&x, 2.0).unwrap();
            prop_assert!(l2 <= l1 * (1.0 + 1e-12));
            prop_assert!(l1 <= (x.len() as f64).sqrt() * l2 * (1.0 + 1e-12));
        }

        #[test]
        fn best_term_is_monotone(x in vec_strategy(), p in 0.1f64..=2.0) {
            let errs: Vec<f64> = (0..=x.len()).map(|s| best_s_term_error(&x, s, p).unwrap()).collect();
            prop_assert!((errs[0] - quasinorm(&x, p).unwrap()).abs() <= 1e-12 * errs[0].max(1.0));
            prop_assert!(errs.windows(2).all(|w| w[1] <= w[0]));
            prop_assert_eq!(*errs.last().unwrap(), 0.0);
        }
    }
}
