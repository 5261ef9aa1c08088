//! Closed-form recovery constants and sufficient conditions.
//!
//! Notation: `δ_kS` and `δ_(k+1)S` are restricted isometry constants at
//! sparsity levels `kS` and `(k+1)S`, and `K = k^(2/p − 1)`. The property
//! `P(k, S, p)` reads
//!
//! ```text
//! δ_kS + K·δ_(k+1)S < K − 1
//! ```
//!
//! Under it, Δp^ε satisfies `‖Δ − x‖₂^p ≤ C₁ ε^p + C₂ σ_S(x)_p^p / S^(1−p/2)`
//! with the constants of [`constant_c1`] and [`constant_c2`].
//!
//! Formulas are transcribed term by term and evaluated in double precision
//! so that every regression value can be checked by hand.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Base of the logarithm that appears as `log 2` in [`constant_cp`] and
/// [`constant_cpq`], and as `log(N/M)` in [`lq_alpha`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LogBase {
    #[default]
    Natural,
    Two,
}

impl LogBase {
    pub fn log(self, x: f64) -> f64 {
        match self {
            LogBase::Natural => x.ln(),
            LogBase::Two => x.log2(),
        }
    }
}

/// Log base used for `log(N/M)` unless a caller asks otherwise.
pub const LQ_LOG_BASE: LogBase = LogBase::Natural;

/// Log base used for the `log 2` factor of `C(p)` unless a caller asks
/// otherwise.
pub const CP_LOG_BASE: LogBase = LogBase::Natural;

fn check_p(p: f64) -> Result<()> {
    if p > 0.0 && p <= 1.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("p must lie in (0, 1], got {p}")))
    }
}

fn check_k(k: f64) -> Result<()> {
    if k > 1.0 && k.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("k must be a finite number > 1, got {k}")))
    }
}

fn check_delta(name: &str, d: f64) -> Result<()> {
    if d >= 0.0 && d.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("{name} must be finite and nonnegative, got {d}")))
    }
}

/// `P(k, S, p)`: `δ_kS + k^(2/p−1)·δ_(k+1)S < k^(2/p−1) − 1`, strictly.
pub fn check_condition_p(delta_ks: f64, delta_k1s: f64, k: f64, p: f64) -> bool {
    let big_k = k.powf(2.0 / p - 1.0);
    delta_ks + big_k * delta_k1s < big_k - 1.0
}

/// `f(m) = ((m−1)^(2/p−1) − 1) / ((m−1)^(2/p−1) + 1)`: any common
/// `δ_mS < f(m)` satisfies `P(m−1, S, p)`.
pub fn threshold_f(m: f64, p: f64) -> f64 {
    let t = (m - 1.0).powf(2.0 / p - 1.0);
    (t - 1.0) / (t + 1.0)
}

/// The competing condition `δ_mS < g(m)`,
/// `g(m) = 4(√2−1)(m/2)^(1/p−1/2) / (4(√2−1)(m/2)^(1/p−1/2) + 2)`.
pub fn threshold_g(m: f64, p: f64) -> f64 {
    let t = 4.0 * (std::f64::consts::SQRT_2 - 1.0) * (m / 2.0).powf(1.0 / p - 0.5);
    t / (t + 2.0)
}

fn check_constants_input(p: f64, k: f64, delta_ks: f64, delta_k1s: f64) -> Result<()> {
    check_p(p)?;
    check_k(k)?;
    check_delta("δ_kS", delta_ks)?;
    check_delta("δ_(k+1)S", delta_k1s)?;
    if !check_condition_p(delta_ks, delta_k1s, k, p) {
        return Err(Error::ConditionNotSatisfied(format!(
            "δ_kS = {delta_ks}, δ_(k+1)S = {delta_k1s}, k = {k}, p = {p}"
        )));
    }
    Ok(())
}

/// Shared denominator `(1−δ_(k+1)S)^(p/2) − (1+δ_kS)^(p/2)·k^(p/2−1)`.
fn shared_denominator(p: f64, k: f64, delta_ks: f64, delta_k1s: f64) -> Result<f64> {
    let den = (1.0 - delta_k1s).powf(p / 2.0) - (1.0 + delta_ks).powf(p / 2.0) * k.powf(p / 2.0 - 1.0);
    if den > 0.0 && den.is_finite() {
        Ok(den)
    } else {
        Err(Error::ConditionNotSatisfied(format!(
            "denominator {den} is not positive"
        )))
    }
}

/// Noise constant `C₁`.
pub fn constant_c1(p: f64, k: f64, delta_ks: f64, delta_k1s: f64) -> Result<f64> {
    check_constants_input(p, k, delta_ks, delta_k1s)?;
    let den = shared_denominator(p, k, delta_ks, delta_k1s)?;
    Ok(2f64.powf(p) * (1.0 + k.powf(p / 2.0 - 1.0) * (2.0 / p - 1.0).powf(-p / 2.0)) / den)
}

/// Compressibility constant `C₂`.
pub fn constant_c2(p: f64, k: f64, delta_ks: f64, delta_k1s: f64) -> Result<f64> {
    check_constants_input(p, k, delta_ks, delta_k1s)?;
    shared_denominator(p, k, delta_ks, delta_k1s)?;
    let prefactor = 2.0 * (p / (2.0 - p)).powf(p / 2.0) / k.powf(1.0 - p / 2.0);
    let numer = ((2.0 / p - 1.0).powf(p / 2.0) + k.powf(p / 2.0 - 1.0)) * (1.0 + delta_ks).powf(p / 2.0);
    let den = (1.0 - delta_k1s).powf(p / 2.0) - (1.0 + delta_ks).powf(p / 2.0) / k.powf(1.0 - p / 2.0);
    Ok(prefactor * (1.0 + numer / den))
}

/// Instance-optimality constant `C₂^(1/p)`.
pub fn instance_optimality_constant(p: f64, k: f64, delta_ks: f64, delta_k1s: f64) -> Result<f64> {
    Ok(constant_c2(p, k, delta_ks, delta_k1s)?.powf(1.0 / p))
}

/// Sparsity level `S_p = ⌊(k+1)/(k^(p/(2−p)) + 1)·S₁⌋` recovered by Δp when
/// the δ-hypothesis holds for Δ₁ at level `S₁`.
///
/// The floor is taken with a relative guard of 1e-12 so that exact integers
/// computed with rounding error are not pushed down by one.
pub fn sparsity_transfer(s1: usize, k: f64, p: f64) -> Result<usize> {
    check_p(p)?;
    check_k(k)?;
    if s1 == 0 {
        return Err(Error::invalid("S₁ must be positive"));
    }
    let ks = k * s1 as f64;
    if (ks - ks.round()).abs() > 1e-9 * ks.max(1.0) {
        return Err(Error::invalid(format!("k·S₁ = {ks} is not an integer")));
    }
    let value = (k + 1.0) / (k.powf(p / (2.0 - p)) + 1.0) * s1 as f64;
    Ok((value * (1.0 + 1e-12)).floor() as usize)
}

/// General constant `C_{p,q}` for `0 < p < 1`, `1 < q ≤ 2`, with the
/// default `log 2` convention.
pub fn constant_cpq(p: f64, q: f64) -> Result<f64> {
    constant_cpq_with(p, q, CP_LOG_BASE)
}

pub fn constant_cpq_with(p: f64, q: f64, base: LogBase) -> Result<f64> {
    let (b1, e1, b2, e2) = cpq_factors(p, q, base)?;
    Ok(b1.powf(e1) * b2.powf(e2))
}

/// `ln C_{p,q}`; finite where [`constant_cpq`] overflows (small `p`).
pub fn ln_constant_cpq(p: f64, q: f64) -> Result<f64> {
    let (b1, e1, b2, e2) = cpq_factors(p, q, CP_LOG_BASE)?;
    Ok(e1 * b1.ln() + e2 * b2.ln())
}

fn cpq_factors(p: f64, q: f64, base: LogBase) -> Result<(f64, f64, f64, f64)> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::invalid(format!("C_(p,q) needs 0 < p < 1, got {p}")));
    }
    if !(q > 1.0 && q <= 2.0) {
        return Err(Error::invalid(format!("C_(p,q) needs 1 < q ≤ 2, got {q}")));
    }
    let r = 1.0 - 1.0 / q;
    let b1 = 2f64.powf(1.0 - p) + 2f64.powf(-p * r) * (1.0 - p) / (p * r);
    let e1 = (1.0 - p / q) / (p * p * r);
    let b2 = 1.0 / ((1.0 - p) * base.log(2.0));
    let e2 = (1.0 / p - 1.0) / (p * r);
    Ok((b1, e1, b2, e2))
}

/// `C(p)`, the `q = 2` case of [`constant_cpq`]; exactly 1 at `p = 1`.
///
/// Overflows to `+∞` for `p` below roughly 0.09; see [`ln_constant_cp`].
pub fn constant_cp(p: f64) -> f64 {
    constant_cp_with(p, CP_LOG_BASE)
}

pub fn constant_cp_with(p: f64, base: LogBase) -> f64 {
    if p == 1.0 {
        return 1.0;
    }
    let (b1, e1, b2, e2) = cp_factors(p, base);
    b1.powf(e1) * b2.powf(e2)
}

pub fn ln_constant_cp(p: f64) -> f64 {
    if p == 1.0 {
        return 0.0;
    }
    let (b1, e1, b2, e2) = cp_factors(p, CP_LOG_BASE);
    e1 * b1.ln() + e2 * b2.ln()
}

fn cp_factors(p: f64, base: LogBase) -> (f64, f64, f64, f64) {
    let b1 = 2f64.powf(1.0 - p) + (1.0 - p) * 2f64.powf(1.0 - p / 2.0) / p;
    let e1 = (2.0 - p) / (p * p);
    let b2 = 1.0 / ((1.0 - p) * base.log(2.0));
    let e2 = (2.0 - 2.0 * p) / (p * p);
    (b1, e1, b2, e2)
}

/// `α = (1/C(p))·(μ²·log(N/M)/M)^(1/p − 1/2)`, the LQp level of a Gaussian
/// `M × N` matrix.
pub fn lq_alpha(m: usize, n: usize, mu: f64, p: f64) -> Result<f64> {
    lq_alpha_with(m, n, mu, p, LQ_LOG_BASE)
}

pub fn lq_alpha_with(m: usize, n: usize, mu: f64, p: f64, base: LogBase) -> Result<f64> {
    check_p(p)?;
    if m == 0 || n <= m {
        return Err(Error::invalid(format!("LQ level needs N > M ≥ 1, got M={m}, N={n}")));
    }
    if !(mu > 0.0 && mu < std::f64::consts::FRAC_1_SQRT_2) {
        return Err(Error::invalid(format!("μ must lie in (0, 1/√2), got {mu}")));
    }
    let inner = mu * mu * base.log(n as f64 / m as f64) / m as f64;
    Ok(inner.powf(1.0 / p - 0.5) / constant_cp(p))
}

/// Constants of the instance-optimality-in-probability argument.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IoConstants {
    pub gamma_p: f64,
    #[serde(rename = "C3")]
    pub c3: f64,
    #[serde(rename = "C_case_i")]
    pub c_case_i: f64,
    #[serde(rename = "C_case_iii")]
    pub c_case_iii: f64,
}

/// `γ_p = μ^(2/p−1)/C(p)`, `C₃ = 1/γ_p + (γ_p(1−δ)+1)/((1−δ²)γ_p)`, and the
/// two combined constants built from `C_{2,p}`.
pub fn io_constants(p: f64, delta: f64, mu: f64, c2p: f64) -> Result<IoConstants> {
    check_p(p)?;
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::invalid(format!("δ must lie in (0, 1), got {delta}")));
    }
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(Error::invalid(format!("μ must be positive, got {mu}")));
    }
    if !(c2p > 0.0 && c2p.is_finite()) {
        return Err(Error::invalid(format!("C_(2,p) must be positive, got {c2p}")));
    }
    let gamma_p = mu.powf(2.0 / p - 1.0) / constant_cp(p);
    let c3 = 1.0 / gamma_p + (gamma_p * (1.0 - delta) + 1.0) / ((1.0 - delta * delta) * gamma_p);
    let spread = 2f64.powf(1.0 / p - 1.0);
    Ok(IoConstants {
        gamma_p,
        c3,
        c_case_i: c3 + spread * c2p * (1.0 / gamma_p + 1.0),
        c_case_iii: 1.0 + c3 + spread * c2p / gamma_p,
    })
}

/// Evaluation of `P(k, S, p)` on a δ profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub p: f64,
    #[serde(rename = "S")]
    pub s: usize,
    pub k: f64,
    pub satisfied: bool,
    #[serde(rename = "C1", default, skip_serializing_if = "Option::is_none")]
    pub c1: Option<f64>,
    #[serde(rename = "C2", default, skip_serializing_if = "Option::is_none")]
    pub c2: Option<f64>,
    #[serde(rename = "delta_kS")]
    pub delta_ks: f64,
    #[serde(rename = "delta_k1S")]
    pub delta_k1s: f64,
}

/// Search `k = n/S` (`n = S+1, S+2, …` while `(k+1)S` is in the profile)
/// and certify at the first `k` satisfying `P(k, S, p)`.
///
/// When no `k` works, the returned certificate is unsatisfied and carries
/// the `k` that came closest, measured by
/// `δ_(k+1)S + (1 + δ_kS)/K − 1`.
pub fn certify_recovery(delta_profile: &[(usize, f64)], s: usize, p: f64) -> Result<Certificate> {
    check_p(p)?;
    if s == 0 {
        return Err(Error::invalid("S must be positive"));
    }
    let table: BTreeMap<usize, f64> = delta_profile.iter().copied().collect();
    let top = table.keys().next_back().copied().unwrap_or(0);
    if top < 2 * s + 1 {
        return Err(Error::ProfileTooShort(format!(
            "S = {s} needs δ up to level at least {}, profile ends at {top}",
            2 * s + 1
        )));
    }

    let mut closest: Option<(f64, Certificate)> = None;
    for n in s + 1..=top - s {
        let (Some(&d_ks), Some(&d_k1s)) = (table.get(&n), table.get(&(n + s))) else {
            continue;
        };
        let k = n as f64 / s as f64;
        let mut cert = Certificate {
            p,
            s,
            k,
            satisfied: false,
            c1: None,
            c2: None,
            delta_ks: d_ks,
            delta_k1s: d_k1s,
        };
        if check_condition_p(d_ks, d_k1s, k, p) {
            if let (Ok(c1), Ok(c2)) = (constant_c1(p, k, d_ks, d_k1s), constant_c2(p, k, d_ks, d_k1s)) {
                cert.satisfied = true;
                cert.c1 = Some(c1);
                cert.c2 = Some(c2);
                return Ok(cert);
            }
        }
        let margin = d_k1s + (1.0 + d_ks) / k.powf(2.0 / p - 1.0) - 1.0;
        if closest.as_ref().is_none_or(|(best, _)| margin < *best) {
            closest = Some((margin, cert));
        }
    }
    closest.map(|(_, c)| c).ok_or_else(|| {
        Error::ProfileTooShort(format!("no level pair (kS, (k+1)S) with k > 1 present for S = {s}"))
    })
}
