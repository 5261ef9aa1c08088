//! Decoders.
//!
//! - [`decode_l0_oracle`]: brute-force Δ₀ on tiny instances.
//! - [`decode_lp`]: Δp, `min ‖y‖_p s.t. Ay = b`, approximated by projected
//!   gradient descent on the smoothed objective
//!   `f_ε(y) = Σ (y_i² + ε²)^(p/2)` while ε shrinks geometrically.
//! - [`decode_lp_eps`]: Δp^ε, `min ‖y‖_p s.t. ‖Ay − b‖₂ ≤ η`, through a
//!   penalty path whose weight is tuned until the residual lands just below
//!   `η`.
//! - [`decode_irls`]: same schedule as [`decode_lp`], with each stage solved
//!   by iteratively reweighted least squares.
//!
//! For `p < 1` the problem is nonconvex and these are local methods.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use serde::{Deserialize, Serialize};

use crate::ensembles::{dot, MeasurementMatrix};
use crate::error::{Error, Result};
use crate::metrics::{l2_norm, quasinorm_unchecked};
use crate::rip::{binomial, next_combination};

/// Largest acceptable condition estimate of `A·Aᵀ`.
pub const MAX_GRAM_CONDITION: f64 = 1e12;

/// Relative ℓ² error at or below which a recovery counts as a success.
pub const DEFAULT_SUCCESS_THRESHOLD: f64 = 1e-3;

const MAX_BACKTRACKS: usize = 60;
const MIN_STEP: f64 = 1e-300;
const MAX_STEP: f64 = 1e300;

/// Euclidean projector onto `{y : Ay = b}` built from a Cholesky
/// factorization `A·Aᵀ = L·Lᵀ`. The rows of `B = L⁻¹A` are an orthonormal
/// basis of the row space of `A`, so `y = z − Bᵀ(Bz − L⁻¹b)` is the
/// projection. Immutable once constructed.
#[derive(Debug, Clone)]
pub struct AffineProjector<'a> {
    a: &'a MeasurementMatrix,
    chol: Cholesky<f64, Dyn>,
    /// `L⁻¹A`, row-major `M × N`.
    basis: Vec<f64>,
    condition: f64,
}

impl<'a> AffineProjector<'a> {
    pub fn new(a: &'a MeasurementMatrix) -> Result<Self> {
        let (m, n) = (a.rows(), a.cols());
        let mut aat = DMatrix::<f64>::zeros(m, m);
        for i in 0..m {
            for j in 0..=i {
                let v = dot(a.row(i), a.row(j));
                aat[(i, j)] = v;
                aat[(j, i)] = v;
            }
        }
        let eig = aat.clone().symmetric_eigenvalues();
        let lo = eig.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = eig.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let condition = if lo > 0.0 { hi / lo } else { f64::INFINITY };
        if !(condition <= MAX_GRAM_CONDITION) {
            return Err(Error::Singular { condition });
        }
        let chol = Cholesky::new(aat).ok_or(Error::Singular { condition })?;
        let mut basis = a.as_slice().to_vec();
        let l = chol.l_dirty();
        // Forward substitution on whole rows: row i of L⁻¹A.
        for i in 0..m {
            for k in 0..i {
                let lik = l[(i, k)];
                if lik != 0.0 {
                    let (done, rest) = basis.split_at_mut(i * n);
                    let src = &done[k * n..(k + 1) * n];
                    for (t, s) in rest[..n].iter_mut().zip(src) {
                        *t -= lik * s;
                    }
                }
            }
            let d = l[(i, i)];
            basis[i * n..(i + 1) * n].iter_mut().for_each(|v| *v /= d);
        }
        Ok(AffineProjector {
            a,
            chol,
            basis,
            condition,
        })
    }

    pub fn matrix(&self) -> &MeasurementMatrix {
        self.a
    }

    /// `λ_max/λ_min` of `A·Aᵀ`.
    pub fn condition(&self) -> f64 {
        self.condition
    }

    fn basis_row(&self, i: usize) -> &[f64] {
        let n = self.a.cols();
        &self.basis[i * n..(i + 1) * n]
    }

    /// `out = g − Bᵀ(B·g − c)`, with `c = 0` for the null-space projection.
    fn remove_row_component(&self, g: &[f64], shift: Option<&[f64]>, out: &mut [f64]) {
        out.copy_from_slice(g);
        for i in 0..self.a.rows() {
            let row = self.basis_row(i);
            let mut coef = dot(row, g);
            if let Some(c) = shift {
                coef -= c[i];
            }
            if coef != 0.0 {
                for (o, r) in out.iter_mut().zip(row) {
                    *o -= coef * r;
                }
            }
        }
    }

    /// `L⁻¹b`.
    fn whiten(&self, b: &[f64]) -> Vec<f64> {
        let mut w = DVector::from_column_slice(b);
        self.chol.l_dirty().solve_lower_triangular_mut(&mut w);
        w.as_slice().to_vec()
    }

    /// `z − Aᵀ(AAᵀ)⁻¹(Az − b)`, with one refinement pass.
    pub fn project(&self, z: &[f64], b: &[f64]) -> Vec<f64> {
        let c = self.whiten(b);
        let mut y = vec![0.0; z.len()];
        self.remove_row_component(z, Some(&c), &mut y);
        let mut refined = vec![0.0; z.len()];
        self.remove_row_component(&y, Some(&c), &mut refined);
        refined
    }

    /// Orthogonal projection onto the null space of `A`.
    pub fn project_null(&self, g: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; g.len()];
        self.project_null_into(g, &mut out);
        out
    }

    pub fn project_null_into(&self, g: &[f64], out: &mut [f64]) {
        self.remove_row_component(g, None, out);
    }

    /// Minimum-ℓ² solution of `Ay = b`.
    pub fn min_norm_point(&self, b: &[f64]) -> Vec<f64> {
        self.project(&vec![0.0; self.a.cols()], b)
    }
}

/// Euclidean projection of `z` onto `{y : Ay = b}`.
pub fn project_affine(z: &[f64], a: &MeasurementMatrix, b: &[f64]) -> Result<Vec<f64>> {
    check_lengths(a, b)?;
    if z.len() != a.cols() {
        return Err(Error::DimensionMismatch(format!(
            "point has length {}, matrix has {} columns",
            z.len(),
            a.cols()
        )));
    }
    Ok(AffineProjector::new(a)?.project(z, b))
}

fn check_lengths(a: &MeasurementMatrix, b: &[f64]) -> Result<()> {
    if b.len() != a.rows() {
        return Err(Error::DimensionMismatch(format!(
            "observation has length {}, matrix has {} rows",
            b.len(),
            a.rows()
        )));
    }
    if b.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("observations must be finite"));
    }
    Ok(())
}

/// `t^(p/2)`, with the common exponents special-cased.
#[inline]
fn half_pow(t: f64, p: f64) -> f64 {
    if p == 1.0 {
        t.sqrt()
    } else if p == 0.5 {
        t.sqrt().sqrt()
    } else {
        t.powf(0.5 * p)
    }
}

/// `f_ε(y) = Σ (y_i² + ε²)^(p/2)`.
pub fn smoothed_objective(y: &[f64], eps: f64, p: f64) -> f64 {
    let e2 = eps * eps;
    y.iter().map(|v| half_pow(v * v + e2, p)).sum()
}

/// `∇f_ε(y)_i = p·y_i·(y_i² + ε²)^(p/2 − 1)`.
pub fn smoothed_gradient(y: &[f64], eps: f64, p: f64) -> Vec<f64> {
    let mut g = vec![0.0; y.len()];
    smoothed_value_and_gradient(y, eps, p, &mut g);
    g
}

/// Objective and gradient sharing one power evaluation per entry.
fn smoothed_value_and_gradient(y: &[f64], eps: f64, p: f64, grad: &mut [f64]) -> f64 {
    let e2 = eps * eps;
    let mut f = 0.0;
    for (gi, &v) in grad.iter_mut().zip(y) {
        let t = v * v + e2;
        let h = half_pow(t, p);
        f += h;
        *gi = p * v * h / t;
    }
    f
}

/// Solver configuration shared by every Δp variant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    pub p: f64,
    /// Initial smoothing; `None` uses `max|y₀|` (1 if `y₀ = 0`).
    pub eps0: Option<f64>,
    pub eps_decay: f64,
    pub eps_min: f64,
    pub max_outer: usize,
    pub max_inner: usize,
    pub grad_tol: f64,
    pub step_init: f64,
    pub backtrack: f64,
    pub armijo: f64,
    pub seed: u64,
    /// Record `(ε, objective, residual)` after every stage.
    pub record_history: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            p: 1.0,
            eps0: None,
            eps_decay: 0.99,
            eps_min: 1e-9,
            max_outer: 3000,
            max_inner: 200,
            grad_tol: 1e-8,
            step_init: 1.0,
            backtrack: 0.5,
            armijo: 1e-4,
            seed: 0,
            record_history: false,
        }
    }
}

impl SolveOptions {
    pub fn with_p(p: f64) -> Self {
        SolveOptions {
            p,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let in_open_unit = |v: f64| v > 0.0 && v < 1.0;
        if !(self.p > 0.0 && self.p <= 1.0) {
            return Err(Error::invalid(format!("p must lie in (0, 1], got {}", self.p)));
        }
        if let Some(e) = self.eps0 {
            if !(e > 0.0 && e.is_finite()) {
                return Err(Error::invalid(format!("eps0 must be positive, got {e}")));
            }
        }
        if !in_open_unit(self.eps_decay) {
            return Err(Error::invalid(format!("eps_decay must lie in (0, 1), got {}", self.eps_decay)));
        }
        if !(self.eps_min > 0.0 && self.eps_min.is_finite()) {
            return Err(Error::invalid(format!("eps_min must be positive, got {}", self.eps_min)));
        }
        if self.max_outer == 0 || self.max_inner == 0 {
            return Err(Error::invalid("max_outer and max_inner must be positive"));
        }
        if !(self.grad_tol > 0.0 && self.step_init > 0.0 && self.step_init.is_finite()) {
            return Err(Error::invalid("grad_tol and step_init must be positive"));
        }
        if !in_open_unit(self.backtrack) || !in_open_unit(self.armijo) {
            return Err(Error::invalid("backtrack and armijo must lie in (0, 1)"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistoryPoint {
    pub eps: f64,
    pub objective: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub solution: Vec<f64>,
    /// `‖solution‖_p`.
    pub objective_p: f64,
    /// `‖A·solution − b‖₂`.
    pub residual_l2: f64,
    pub outer_iters: usize,
    pub inner_iters_total: usize,
    pub eps_final: f64,
    pub converged: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub history: Option<Vec<HistoryPoint>>,
}

impl SolveReport {
    /// History as CSV with header `eps,objective,residual`.
    pub fn history_csv(&self) -> String {
        let mut out = String::from("eps,objective,residual\n");
        for h in self.history.iter().flatten() {
            out.push_str(&format!("{},{},{}\n", h.eps, h.objective, h.residual));
        }
        out
    }
}

fn residual_norm(a: &MeasurementMatrix, y: &[f64], b: &[f64]) -> f64 {
    a.mul_vec(y)
        .iter()
        .zip(b)
        .map(|(ay, bi)| (ay - bi).powi(2))
        .sum::<f64>()
        .sqrt()
}

fn check_finite(y: &[f64]) -> Result<()> {
    if y.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::Divergence("non-finite iterate".into()))
    }
}

/// Outcome of one fixed-ε stage.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StageOutcome {
    pub iterations: usize,
    pub converged: bool,
    pub objective: f64,
}

/// Projected gradient descent on `f_ε` over `{Ay = b}` starting from a
/// feasible `y`.
///
/// Steps start from a Barzilai–Borwein estimate (the carried `step` on the
/// first iteration) and are shortened by `backtrack` until the Armijo
/// condition `f(y − t·d) ≤ f(y) − armijo·t·‖d‖²` holds, `d` being the
/// projected gradient. The stage ends when `‖d‖ ≤ grad_tol·(1 + f)`.
/// When `trace` is given, the objective after every accepted step is
/// appended to it.
pub fn projected_gradient_stage(
    proj: &AffineProjector<'_>,
    y: &mut [f64],
    eps: f64,
    opts: &SolveOptions,
    step: &mut f64,
    mut trace: Option<&mut Vec<f64>>,
) -> Result<StageOutcome> {
    let n = y.len();
    let p = opts.p;
    let mut grad = vec![0.0; n];
    let mut f = smoothed_value_and_gradient(y, eps, p, &mut grad);
    let mut dir = vec![0.0; n];
    let mut new_dir = vec![0.0; n];
    proj.project_null_into(&grad, &mut dir);
    let mut trial = vec![0.0; n];
    let mut iterations = 0;
    let mut converged = false;

    while iterations < opts.max_inner {
        let d2 = dot(&dir, &dir);
        if d2.sqrt() <= opts.grad_tol * (1.0 + f) {
            converged = true;
            break;
        }
        let mut t = step.clamp(MIN_STEP, MAX_STEP);
        let mut accepted = None;
        for _ in 0..MAX_BACKTRACKS {
            for ((ti, yi), di) in trial.iter_mut().zip(y.iter()).zip(&dir) {
                *ti = yi - t * di;
            }
            let ft = smoothed_objective(&trial, eps, p);
            if ft <= f - opts.armijo * t * d2 {
                accepted = Some(ft);
                break;
            }
            t *= opts.backtrack;
        }
        let Some(f_new) = accepted else {
            break;
        };
        if !f_new.is_finite() {
            return Err(Error::Divergence(format!("objective became {f_new}")));
        }
        iterations += 1;
        y.copy_from_slice(&trial);
        f = smoothed_value_and_gradient(y, eps, p, &mut grad);
        proj.project_null_into(&grad, &mut new_dir);
        // s = −t·d lies in the null space, so sᵀ(g₊ − g) = sᵀ(d₊ − d).
        let sy: f64 = dir.iter().zip(&new_dir).map(|(d0, d1)| -t * d0 * (d1 - d0)).sum();
        let ss = t * t * d2;
        *step = if sy > 0.0 { ss / sy } else { t * 2.0 };
        std::mem::swap(&mut dir, &mut new_dir);
        if let Some(tr) = trace.as_deref_mut() {
            tr.push(f);
        }
    }
    Ok(StageOutcome {
        iterations,
        converged,
        objective: f,
    })
}

/// Which solver runs each fixed-ε stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum StageSolver {
    ProjectedGradient,
    Irls,
}

/// Δp: approximate `argmin ‖y‖_p subject to Ay = b`.
///
/// Starts from the minimum-ℓ² feasible point, then for
/// `ε = eps0, 0.99·eps0, …` while `ε ≥ eps_min` minimizes `f_ε` over the
/// affine set, warm-starting each stage from the previous one.
pub fn decode_lp(a: &MeasurementMatrix, b: &[f64], opts: &SolveOptions) -> Result<SolveReport> {
    continuation(a, b, opts, StageSolver::ProjectedGradient)
}

/// Δp with each stage solved by iteratively reweighted least squares:
/// `y ← D·Aᵀ·(A·D·Aᵀ)⁻¹·b`, `D = diag((y_i² + ε²)^(1 − p/2))`.
pub fn decode_irls(a: &MeasurementMatrix, b: &[f64], opts: &SolveOptions) -> Result<SolveReport> {
    continuation(a, b, opts, StageSolver::Irls)
}

fn continuation(
    a: &MeasurementMatrix,
    b: &[f64],
    opts: &SolveOptions,
    solver: StageSolver,
) -> Result<SolveReport> {
    opts.validate()?;
    check_lengths(a, b)?;
    let proj = AffineProjector::new(a)?;
    let mut y = proj.min_norm_point(b);
    check_finite(&y)?;

    let peak = y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut eps = opts.eps0.unwrap_or(if peak > 0.0 { peak } else { 1.0 });
    let mut step = opts.step_init;
    let mut outer = 0;
    let mut inner_total = 0;
    let mut all_converged = true;
    let mut eps_final = eps;
    let mut history = opts.record_history.then(Vec::new);

    while eps >= opts.eps_min && outer < opts.max_outer {
        let outcome = match solver {
            StageSolver::ProjectedGradient => {
                projected_gradient_stage(&proj, &mut y, eps, opts, &mut step, None)?
            }
            StageSolver::Irls => irls_stage(&proj, b, &mut y, eps, opts, None)?,
        };
        check_finite(&y)?;
        // Re-anchor on the affine set to stop rounding drift.
        y = proj.project(&y, b);
        outer += 1;
        inner_total += outcome.iterations;
        all_converged &= outcome.converged;
        eps_final = eps;
        if let Some(h) = history.as_mut() {
            h.push(HistoryPoint {
                eps,
                objective: quasinorm_unchecked(&y, opts.p),
                residual: residual_norm(a, &y, b),
            });
        }
        eps *= opts.eps_decay;
    }

    Ok(SolveReport {
        objective_p: quasinorm_unchecked(&y, opts.p),
        residual_l2: residual_norm(a, &y, b),
        solution: y,
        outer_iters: outer,
        inner_iters_total: inner_total,
        eps_final,
        converged: all_converged && eps < opts.eps_min,
        history,
    })
}

/// IRLS iterations at fixed ε. Each update is the weighted least-norm
/// solution of `Ay = b`, so feasibility holds by construction.
/// When `trace` is given, every iterate's objective is appended.
pub fn irls_stage(
    proj: &AffineProjector<'_>,
    b: &[f64],
    y: &mut [f64],
    eps: f64,
    opts: &SolveOptions,
    mut trace: Option<&mut Vec<f64>>,
) -> Result<StageOutcome> {
    let a = proj.matrix();
    let (m, n) = (a.rows(), a.cols());
    let p = opts.p;
    let e2 = eps * eps;
    let mut grad = vec![0.0; n];
    let mut f = smoothed_value_and_gradient(y, eps, p, &mut grad);
    let mut iterations = 0;
    let mut converged = false;
    let mut weights = vec![0.0; n];
    let mut scaled_row = vec![0.0; n];

    while iterations < opts.max_inner {
        let pg = proj.project_null(&grad);
        if l2_norm(&pg) <= opts.grad_tol * (1.0 + f) {
            converged = true;
            break;
        }
        for (w, &v) in weights.iter_mut().zip(y.iter()) {
            *w = (v * v + e2).powf(1.0 - p / 2.0);
        }
        let mut g = DMatrix::<f64>::zeros(m, m);
        for i in 0..m {
            for ((s, &ai), &w) in scaled_row.iter_mut().zip(a.row(i)).zip(&weights) {
                *s = ai * w;
            }
            for j in 0..=i {
                let v = dot(&scaled_row, a.row(j));
                g[(i, j)] = v;
                g[(j, i)] = v;
            }
        }
        let Some(chol) = Cholesky::new(g) else {
            return Err(Error::Singular { condition: f64::INFINITY });
        };
        let lam = chol.solve(&DVector::from_column_slice(b));
        let at_lam = a.tr_mul_vec(lam.as_slice());
        for ((yi, w), v) in y.iter_mut().zip(&weights).zip(at_lam) {
            *yi = w * v;
        }
        check_finite(y)?;
        iterations += 1;
        f = smoothed_value_and_gradient(y, eps, p, &mut grad);
        if let Some(tr) = trace.as_deref_mut() {
            tr.push(f);
        }
    }
    Ok(StageOutcome {
        iterations,
        converged,
        objective: f,
    })
}

/// Δp^ε: approximate `argmin ‖y‖_p subject to ‖Ay − b‖₂ ≤ eps_noise`.
///
/// Minimizes `f_ε(y) + ‖Ay − b‖₂²/(2μ)` along the same ε schedule and
/// bisects `log μ` (at most [`PENALTY_BISECTION_STEPS`] solves) until the
/// residual lies in `[0.9, 1.0]·eps_noise`. If the band is never hit, the
/// feasible candidate with the smallest objective is returned, or the
/// least-residual candidate when none is feasible.
pub fn decode_lp_eps(
    a: &MeasurementMatrix,
    b: &[f64],
    eps_noise: f64,
    opts: &SolveOptions,
) -> Result<SolveReport> {
    if !(eps_noise >= 0.0 && eps_noise.is_finite()) {
        return Err(Error::invalid(format!("noise level must be finite and nonnegative, got {eps_noise}")));
    }
    if eps_noise == 0.0 {
        return decode_lp(a, b, opts);
    }
    opts.validate()?;
    check_lengths(a, b)?;
    let b_norm = l2_norm(b);
    if b_norm <= eps_noise {
        return Ok(SolveReport {
            solution: vec![0.0; a.cols()],
            objective_p: 0.0,
            residual_l2: b_norm,
            outer_iters: 0,
            inner_iters_total: 0,
            eps_final: 0.0,
            converged: true,
            history: opts.record_history.then(Vec::new),
        });
    }
    let proj = AffineProjector::new(a)?;
    let y0 = proj.min_norm_point(b);
    let lipschitz = operator_norm_sq(a);

    // μ·‖Aᵀr‖ balances ∇f_ε; the bracket spans that scale generously.
    let mut lo = (eps_noise / (b_norm * lipschitz.max(1.0))).ln() - 12.0 * std::f64::consts::LN_10;
    let mut hi = (b_norm * lipschitz.max(1.0) / eps_noise).ln() + 6.0 * std::f64::consts::LN_10;
    let mut feasible: Option<SolveReport> = None;
    let mut least_residual: Option<SolveReport> = None;
    let mut total_outer = 0;
    let mut total_inner = 0;

    for _ in 0..PENALTY_BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        let report = penalty_path(a, b, &y0, mid.exp(), lipschitz, opts)?;
        total_outer += report.outer_iters;
        total_inner += report.inner_iters_total;
        let r = report.residual_l2;
        if r <= eps_noise {
            let in_band = r >= 0.9 * eps_noise;
            if feasible.as_ref().is_none_or(|f| report.objective_p < f.objective_p) {
                feasible = Some(report.clone());
            }
            if in_band {
                feasible = Some(report);
                break;
            }
            lo = mid;
        } else {
            if least_residual.as_ref().is_none_or(|l| r < l.residual_l2) {
                least_residual = Some(report);
            }
            hi = mid;
        }
    }
    let mut best = feasible
        .or(least_residual)
        .expect("at least one bisection step runs");
    best.outer_iters = total_outer;
    best.inner_iters_total = total_inner;
    Ok(best)
}

/// Upper bound on the number of penalty solves in [`decode_lp_eps`].
pub const PENALTY_BISECTION_STEPS: usize = 40;

/// `‖A‖₂²` by power iteration on `AᵀA`.
fn operator_norm_sq(a: &MeasurementMatrix) -> f64 {
    let mut v = vec![1.0 / (a.cols() as f64).sqrt(); a.cols()];
    let mut est = 0.0;
    for _ in 0..100 {
        let w = a.tr_mul_vec(&a.mul_vec(&v));
        let norm = l2_norm(&w);
        if norm == 0.0 {
            return 0.0;
        }
        let converged = (norm - est).abs() <= 1e-10 * norm;
        est = norm;
        v = w.into_iter().map(|x| x / norm).collect();
        if converged {
            break;
        }
    }
    est
}

fn penalty_path(
    a: &MeasurementMatrix,
    b: &[f64],
    y0: &[f64],
    mu: f64,
    lipschitz: f64,
    opts: &SolveOptions,
) -> Result<SolveReport> {
    let n = a.cols();
    let p = opts.p;
    let mut y = y0.to_vec();
    let peak = y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut eps = opts.eps0.unwrap_or(if peak > 0.0 { peak } else { 1.0 });
    let mut step = (mu / lipschitz.max(f64::MIN_POSITIVE)).min(opts.step_init);
    let mut outer = 0;
    let mut inner_total = 0;
    let mut all_converged = true;
    let mut eps_final = eps;
    let mut history = opts.record_history.then(Vec::new);
    let mut grad = vec![0.0; n];
    let mut trial = vec![0.0; n];

    let objective = |y: &[f64], eps: f64, grad: Option<&mut [f64]>| -> f64 {
        let r: Vec<f64> = a.mul_vec(y).iter().zip(b).map(|(ay, bi)| ay - bi).collect();
        let penalty = dot(&r, &r) / (2.0 * mu);
        match grad {
            Some(g) => {
                let f = smoothed_value_and_gradient(y, eps, p, g);
                for (gi, ci) in g.iter_mut().zip(a.tr_mul_vec(&r)) {
                    *gi += ci / mu;
                }
                f + penalty
            }
            None => smoothed_objective(y, eps, p) + penalty,
        }
    };

    while eps >= opts.eps_min && outer < opts.max_outer {
        let mut f = objective(&y, eps, Some(&mut grad));
        let mut iterations = 0;
        let mut converged = false;
        while iterations < opts.max_inner {
            let g2 = dot(&grad, &grad);
            if g2.sqrt() <= opts.grad_tol * (1.0 + f) {
                converged = true;
                break;
            }
            let mut t = step.clamp(MIN_STEP, MAX_STEP);
            let mut accepted = None;
            for _ in 0..MAX_BACKTRACKS {
                for ((ti, yi), gi) in trial.iter_mut().zip(&y).zip(&grad) {
                    *ti = yi - t * gi;
                }
                let ft = objective(&trial, eps, None);
                if ft <= f - opts.armijo * t * g2 {
                    accepted = Some(ft);
                    break;
                }
                t *= opts.backtrack;
            }
            if accepted.is_none() {
                break;
            }
            iterations += 1;
            let old_grad = grad.clone();
            y.copy_from_slice(&trial);
            f = objective(&y, eps, Some(&mut grad));
            if !f.is_finite() {
                return Err(Error::Divergence(format!("penalized objective became {f}")));
            }
            let sy: f64 = old_grad.iter().zip(&grad).map(|(g0, g1)| -t * g0 * (g1 - g0)).sum();
            let ss = t * t * g2;
            step = if sy > 0.0 { ss / sy } else { t * 2.0 };
        }
        check_finite(&y)?;
        outer += 1;
        inner_total += iterations;
        all_converged &= converged;
        eps_final = eps;
        if let Some(h) = history.as_mut() {
            h.push(HistoryPoint {
                eps,
                objective: quasinorm_unchecked(&y, p),
                residual: residual_norm(a, &y, b),
            });
        }
        eps *= opts.eps_decay;
    }
    Ok(SolveReport {
        objective_p: quasinorm_unchecked(&y, p),
        residual_l2: residual_norm(a, &y, b),
        solution: y,
        outer_iters: outer,
        inner_iters_total: inner_total,
        eps_final,
        converged: all_converged && eps < opts.eps_min,
        history,
    })
}

/// Limits on the Δ₀ enumeration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnumerationGuard {
    pub max_n: usize,
    pub max_s: usize,
}

impl Default for EnumerationGuard {
    fn default() -> Self {
        EnumerationGuard { max_n: 25, max_s: 4 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct L0Solution {
    pub solution: Vec<f64>,
    pub support: Vec<usize>,
    pub residual: f64,
    /// False when no support of size ≤ `S_max` reached the residual
    /// tolerance; `solution` is then the least-residual candidate.
    pub within_tolerance: bool,
}

/// Δ₀ by enumeration with the default guard (`N ≤ 25`, `S_max ≤ 4`).
pub fn decode_l0_oracle(
    a: &MeasurementMatrix,
    b: &[f64],
    s_max: usize,
    res_tol: f64,
) -> Result<L0Solution> {
    decode_l0_oracle_guarded(a, b, s_max, res_tol, EnumerationGuard::default())
}

/// Enumerates supports by increasing size (lexicographically within a
/// size) and solves least squares on each. Returns the least-residual
/// support of the smallest size reaching `res_tol`; among exact ties the
/// lexicographically first support wins.
pub fn decode_l0_oracle_guarded(
    a: &MeasurementMatrix,
    b: &[f64],
    s_max: usize,
    res_tol: f64,
    guard: EnumerationGuard,
) -> Result<L0Solution> {
    check_lengths(a, b)?;
    let n = a.cols();
    if n > guard.max_n || s_max > guard.max_s {
        return Err(Error::TooLarge {
            what: "Δ₀ support enumeration",
            count: (0..=s_max.min(n)).map(|s| binomial(n, s)).sum(),
            cap: (0..=guard.max_s.min(guard.max_n)).map(|s| binomial(guard.max_n, s)).sum(),
            hint: "raise the enumeration guard or use decode_lp",
        });
    }
    if !(res_tol >= 0.0) {
        return Err(Error::invalid("residual tolerance must be nonnegative"));
    }
    let b_norm = l2_norm(b);
    let mut overall = L0Solution {
        solution: vec![0.0; n],
        support: Vec::new(),
        residual: b_norm,
        within_tolerance: b_norm <= res_tol,
    };
    if overall.within_tolerance {
        return Ok(overall);
    }
    let bm = DVector::from_column_slice(b);
    for s in 1..=s_max.min(n) {
        let mut comb: Vec<usize> = (0..s).collect();
        let mut best_here: Option<(f64, Vec<usize>, Vec<f64>)> = None;
        loop {
            let sub = DMatrix::from_fn(a.rows(), s, |i, j| a.get(i, comb[j]));
            let svd = sub.clone().svd(true, true);
            if let Ok(coef) = svd.solve(&bm, 1e-12) {
                let resid = (&sub * &coef - &bm).norm();
                if best_here.as_ref().is_none_or(|(r, _, _)| resid < *r) {
                    best_here = Some((resid, comb.clone(), coef.as_slice().to_vec()));
                }
            }
            if !next_combination(&mut comb, n) {
                break;
            }
        }
        if let Some((resid, support, coef)) = best_here {
            let candidate = L0Solution {
                solution: crate::ensembles::place_on_support(&coef, &support, n),
                support,
                residual: resid,
                within_tolerance: resid <= res_tol,
            };
            if candidate.within_tolerance {
                return Ok(candidate);
            }
            if resid < overall.residual {
                overall = candidate;
            }
        }
    }
    Ok(overall)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::gen_gaussian;

    #[test]
    fn projection_onto_a_coordinate_plane() {
        let a = MeasurementMatrix::from_rows(&[vec![1.0, 0.0]]).unwrap();
        let y = project_affine(&[0.0, 5.0], &a, &[1.0]).unwrap();
        assert!((y[0] - 1.0).abs() < 1e-15 && (y[1] - 5.0).abs() < 1e-15);
    }

    #[test]
    fn projection_fixes_feasible_points() {
        let a = gen_gaussian(4, 9, 1).unwrap();
        let z: Vec<f64> = (0..9).map(|i| (i as f64 * 0.37).sin()).collect();
        let b = a.mul_vec(&z);
        let y = project_affine(&z, &a, &b).unwrap();
        for (yi, zi) in y.iter().zip(&z) {
            assert!((yi - zi).abs() < 1e-12);
        }
    }

    #[test]
    fn singular_rows_rejected() {
        let a = MeasurementMatrix::from_rows(&[vec![1.0, 2.0, 3.0], vec![2.0, 4.0, 6.0]]).unwrap();
        assert!(matches!(AffineProjector::new(&a), Err(Error::Singular { .. })));
    }

    #[test]
    fn smoothing_sandwich() {
        let y = [0.3, -2.0, 0.0, 1e-4];
        for p in [0.3, 0.5, 1.0] {
            for eps in [1e-6, 1e-2, 1.0] {
                let f = smoothed_objective(&y, eps, p);
                let base = crate::metrics::pth_power_sum(&y, p);
                assert!(base <= f + 1e-15);
                assert!(f <= base + y.len() as f64 * eps.powf(p) + 1e-12);
            }
        }
    }

    #[test]
    fn zero_observation_gives_zero() {
        let a = gen_gaussian(4, 8, 2).unwrap();
        let r = decode_lp(&a, &[0.0; 4], &SolveOptions::with_p(0.5)).unwrap();
        assert!(r.solution.iter().all(|v| *v == 0.0));
        assert_eq!(r.objective_p, 0.0);
        assert!(r.converged);
        let r = decode_irls(&a, &[0.0; 4], &SolveOptions::with_p(0.5)).unwrap();
        assert!(r.solution.iter().all(|v| *v == 0.0));
        let l0 = decode_l0_oracle(&a, &[0.0; 4], 2, 1e-10).unwrap();
        assert!(l0.support.is_empty() && l0.within_tolerance);
    }

    #[test]
    fn noisy_decoder_shortcuts() {
        let a = gen_gaussian(4, 8, 2).unwrap();
        let b = [0.1, -0.2, 0.05, 0.0];
        let r = decode_lp_eps(&a, &b, 1.0, &SolveOptions::with_p(0.5)).unwrap();
        assert!(r.solution.iter().all(|v| *v == 0.0));
        let opts = SolveOptions::with_p(0.5);
        assert_eq!(decode_lp_eps(&a, &b, 0.0, &opts).unwrap(), decode_lp(&a, &b, &opts).unwrap());
        assert!(decode_lp_eps(&a, &b, -1.0, &opts).is_err());
    }

    #[test]
    fn options_validation() {
        let mut o = SolveOptions::with_p(1.5);
        assert!(o.validate().is_err());
        o.p = 0.5;
        assert!(o.validate().is_ok());
        o.eps_decay = 1.0;
        assert!(o.validate().is_err());
    }

    #[test]
    fn enumeration_guard() {
        let a = gen_gaussian(4, 30, 2).unwrap();
        assert!(matches!(decode_l0_oracle(&a, &[1.0; 4], 2, 1e-9), Err(Error::TooLarge { .. })));
        let a = gen_gaussian(4, 8, 2).unwrap();
        assert!(matches!(decode_l0_oracle(&a, &[1.0; 4], 5, 1e-9), Err(Error::TooLarge { .. })));
    }

    #[test]
    fn l0_tie_break_prefers_first_support() {
        // Columns 0 and 2 are identical, so both reach b exactly.
        let a = MeasurementMatrix::from_columns(&[vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let sol = decode_l0_oracle(&a, &[2.0, 0.0], 2, 1e-12).unwrap();
        assert_eq!(sol.support, vec![0]);
        assert!((sol.solution[0] - 2.0).abs() < 1e-12);
    }
}
