//! Experiment harness.
//!
//! Four experiments, each producing CSV tables plus a JSON sidecar that
//! records the complete configuration:
//!
//! | file                   | columns                                                   |
//! |------------------------|-----------------------------------------------------------|
//! | `fig1_conditions.csv`  | `p,m,f,g`                                                 |
//! | `fig2_theoretical.csv` | `S,p,satisfied,k,delta_kS,delta_k1S,C1,C2`                |
//! | `fig2_empirical.csv`   | `S,p,success_rate,successes,trials`                       |
//! | `fig3_sweep.csv`       | `mode,lambda,p,mean_error`                                |
//! | `fig4_snr.csv`         | `q,p,mean_snr_db`                                         |
//!
//! Sidecars share the CSV stem (`fig2_theoretical.json`, ...). Empty
//! `C1`/`C2` fields mean the condition was not certified. Every random
//! draw is keyed by the experiment seed and the cell coordinates, so the
//! files are byte-identical across reruns and thread counts.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::certify::{certify_recovery, threshold_f, threshold_g, Certificate, LogBase, CP_LOG_BASE};
use crate::decode::{decode_lp, SolveOptions, DEFAULT_SUCCESS_THRESHOLD};
use crate::ensembles::{
    compose_mixed, gen_gaussian, gen_powerlaw_signal, gen_sparse_signal, gen_uniform_sphere,
    place_on_support, random_support, sphere_point, MeasurementMatrix,
};
use crate::error::{Error, Result};
use crate::metrics::{l2_distance, relative_l2_error, snr_db};
use crate::rip::{profile_pairs, rip_profile, RipEstimate, DEFAULT_MC_TRIALS};
use crate::rng::{derive_seed, stream_rng};

pub const FORMAT_VERSION: u32 = 1;

const MATRIX_TAG: u64 = 0x4d41_5452;
const SIGNAL_TAG: u64 = 0x5349_474e;
const SUPPORT_TAG: u64 = 0x5355_5050;
const COEFF_TAG: u64 = 0x434f_4546;
const NOISE_TAG: u64 = 0x4e4f_4953;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    Desk,
    Paper,
}

/// Solver settings for desk-scale grids: ten inner steps per smoothing
/// level and continuation down to `ε = 1e-6`.
pub fn desk_solver() -> SolveOptions {
    SolveOptions {
        max_inner: 10,
        eps_min: 1e-6,
        ..SolveOptions::default()
    }
}

/// `start, start+step, …` up to `stop` inclusive (with a `1e-9·step`
/// allowance), each value rounded to 12 decimals so that `0:0.1:1`
/// yields `0.3` rather than `0.30000000000000004`.
pub fn float_range(start: f64, step: f64, stop: f64) -> Result<Vec<f64>> {
    if !(start.is_finite() && step.is_finite() && stop.is_finite()) || step <= 0.0 {
        return Err(Error::invalid(format!(
            "range {start}:{step}:{stop} needs finite bounds and a positive step"
        )));
    }
    if stop < start {
        return Err(Error::invalid(format!("range {start}:{step}:{stop} is empty")));
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    if count > 1_000_000 {
        return Err(Error::invalid(format!("range {start}:{step}:{stop} has {count} points")));
    }
    Ok((0..count)
        .map(|i| ((start + i as f64 * step) * 1e12).round() / 1e12)
        .collect())
}

fn check_p_axis(p_axis: &[f64]) -> Result<()> {
    if p_axis.is_empty() {
        return Err(Error::invalid("p axis is empty"));
    }
    match p_axis.iter().find(|&&p| !(p > 0.0 && p <= 1.0)) {
        Some(p) => Err(Error::invalid(format!("every p must lie in (0, 1], got {p}"))),
        None => Ok(()),
    }
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Least-squares line through `(x, y)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    /// `1 − SS_res/SS_tot`; 1 when `y` is constant and fitted exactly.
    pub r_squared: f64,
}

pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<LinearFit> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::invalid("linear fit needs two equally long series of length ≥ 2"));
    }
    let (mx, my) = (mean(x), mean(y));
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::invalid("linear fit needs at least two distinct abscissae"));
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| (b - intercept - slope * a).powi(2))
        .sum();
    let ss_tot: f64 = y.iter().map(|v| (v - my).powi(2)).sum();
    let r_squared = if ss_tot == 0.0 {
        if ss_res == 0.0 { 1.0 } else { 0.0 }
    } else {
        1.0 - ss_res / ss_tot
    };
    Ok(LinearFit { slope, intercept, r_squared })
}

// ---------------------------------------------------------------- fig 1

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConditionRow {
    pub p: f64,
    pub m: f64,
    pub f: f64,
    pub g: f64,
}

/// `f(m)` and `g(m)` for every `(p, m)` pair, `p` major.
pub fn run_condition_curves(p_list: &[f64], m_grid: &[f64]) -> Result<Vec<ConditionRow>> {
    check_p_axis(p_list)?;
    if let Some(m) = m_grid.iter().find(|&&m| !(m >= 2.0 && m.is_finite())) {
        return Err(Error::invalid(format!("every m must be finite and ≥ 2, got {m}")));
    }
    Ok(p_list
        .iter()
        .flat_map(|&p| {
            m_grid.iter().map(move |&m| ConditionRow {
                p,
                m,
                f: threshold_f(m, p),
                g: threshold_g(m, p),
            })
        })
        .collect())
}

pub fn conditions_csv(rows: &[ConditionRow]) -> String {
    let mut out = String::from("p,m,f,g\n");
    for r in rows {
        out.push_str(&format!("{},{},{},{}\n", r.p, r.m, r.f, r.g));
    }
    out
}

// ---------------------------------------------------------------- fig 2

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PhaseCells {
    Guaranteed(Vec<Vec<bool>>),
    Rate(Vec<Vec<f64>>),
}

/// Results over an `S × p` grid; `cells[i][j]` belongs to
/// `(S_axis[i], p_axis[j])`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseGrid {
    #[serde(rename = "S_axis")]
    pub s_axis: Vec<usize>,
    pub p_axis: Vec<f64>,
    pub cells: PhaseCells,
    /// Decodes per cell, or Monte-Carlo supports per RIP level for a
    /// theoretical grid.
    pub trials_per_cell: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub success_threshold: Option<f64>,
    pub seed: u64,
    /// Decodes that returned an error (counted as failures).
    #[serde(default)]
    pub solver_failures: usize,
}

impl PhaseGrid {
    pub fn rate(&self, si: usize, pi: usize) -> Option<f64> {
        match &self.cells {
            PhaseCells::Rate(r) => r.get(si)?.get(pi).copied(),
            PhaseCells::Guaranteed(_) => None,
        }
    }

    pub fn guaranteed(&self, si: usize, pi: usize) -> Option<bool> {
        match &self.cells {
            PhaseCells::Guaranteed(g) => g.get(si)?.get(pi).copied(),
            PhaseCells::Rate(_) => None,
        }
    }

    pub fn cell_count(&self) -> usize {
        self.s_axis.len() * self.p_axis.len()
    }
}

fn check_s_axis(s_axis: &[usize], n: usize) -> Result<()> {
    if s_axis.is_empty() {
        return Err(Error::invalid("S axis is empty"));
    }
    match s_axis.iter().find(|&&s| s == 0 || s > n) {
        Some(s) => Err(Error::invalid(format!("every S must satisfy 1 ≤ S ≤ N = {n}, got {s}"))),
        None => Ok(()),
    }
}

/// Theoretical grid with the profile and per-cell certificates it came
/// from. `certificates` is `S` major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoreticalPhase {
    pub grid: PhaseGrid,
    pub profile: Vec<RipEstimate>,
    pub certificates: Vec<Certificate>,
}

/// Monte-Carlo δ profile of `a` up to `min(M, N)`, then
/// [`certify_recovery`] for every `(S, p)`.
pub fn run_theoretical_phase(
    a: &MeasurementMatrix,
    s_axis: &[usize],
    p_axis: &[f64],
    trials: usize,
    seed: u64,
) -> Result<PhaseGrid> {
    Ok(run_theoretical_phase_detailed(a, s_axis, p_axis, trials, seed)?.grid)
}

pub fn run_theoretical_phase_detailed(
    a: &MeasurementMatrix,
    s_axis: &[usize],
    p_axis: &[f64],
    trials: usize,
    seed: u64,
) -> Result<TheoreticalPhase> {
    check_p_axis(p_axis)?;
    check_s_axis(s_axis, a.cols())?;
    let top = a.rows().min(a.cols());
    let profile = rip_profile(a, top, trials, seed)?;
    let pairs = profile_pairs(&profile);
    let mut certificates = Vec::with_capacity(s_axis.len() * p_axis.len());
    let mut cells = Vec::with_capacity(s_axis.len());
    for &s in s_axis {
        let mut row = Vec::with_capacity(p_axis.len());
        for &p in p_axis {
            let cert = certify_recovery(&pairs, s, p)?;
            row.push(cert.satisfied);
            certificates.push(cert);
        }
        cells.push(row);
    }
    Ok(TheoreticalPhase {
        grid: PhaseGrid {
            s_axis: s_axis.to_vec(),
            p_axis: p_axis.to_vec(),
            cells: PhaseCells::Guaranteed(cells),
            trials_per_cell: trials,
            success_threshold: None,
            seed,
            solver_failures: 0,
        },
        profile,
        certificates,
    })
}

pub fn theoretical_csv(phase: &TheoreticalPhase) -> String {
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    let mut out = String::from("S,p,satisfied,k,delta_kS,delta_k1S,C1,C2\n");
    for c in &phase.certificates {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            c.s,
            c.p,
            c.satisfied,
            c.k,
            c.delta_ks,
            c.delta_k1s,
            opt(c.c1),
            opt(c.c2)
        ));
    }
    out
}

/// The Gaussian matrix shared by both halves of the phase experiment.
pub fn phase_matrix(m: usize, n: usize, seed: u64) -> Result<MeasurementMatrix> {
    gen_gaussian(m, n, derive_seed(seed, &[MATRIX_TAG]))
}

/// Empirical success rates of `decode_lp` on one Gaussian matrix.
///
/// The planted signal of trial `t` at sparsity `S` is drawn from stream
/// `(seed, S, t)` and shared by every `p`, so columns of the grid are
/// paired comparisons. `opts.p` is replaced by each grid `p`.
#[allow(clippy::too_many_arguments)]
pub fn run_phase_diagram(
    m: usize,
    n: usize,
    s_axis: &[usize],
    p_axis: &[f64],
    trials: usize,
    success_threshold: f64,
    seed: u64,
    opts: &SolveOptions,
) -> Result<PhaseGrid> {
    check_p_axis(p_axis)?;
    check_s_axis(s_axis, n)?;
    if trials == 0 {
        return Err(Error::invalid("trials per cell must be positive"));
    }
    if !(success_threshold > 0.0) {
        return Err(Error::invalid("success threshold must be positive"));
    }
    opts.validate()?;
    let a = phase_matrix(m, n, seed)?;
    let signals: Vec<Vec<f64>> = s_axis
        .iter()
        .flat_map(|&s| (0..trials).map(move |t| (s, t)))
        .map(|(s, t)| gen_sparse_signal(n, s, derive_seed(seed, &[SIGNAL_TAG, s as u64, t as u64])))
        .collect::<Result<_>>()?;
    let observations: Vec<Vec<f64>> = signals.iter().map(|x| a.mul_vec(x)).collect();

    let np = p_axis.len();
    let jobs: Vec<(usize, usize, usize)> = (0..s_axis.len())
        .flat_map(|si| (0..np).flat_map(move |pi| (0..trials).map(move |t| (si, pi, t))))
        .collect();
    // Some(true) success, Some(false) inaccurate, None solver error.
    let outcomes: Vec<Option<bool>> = jobs
        .par_iter()
        .map(|&(si, pi, t)| {
            let idx = si * trials + t;
            let o = SolveOptions { p: p_axis[pi], ..*opts };
            decode_lp(&a, &observations[idx], &o)
                .ok()
                .map(|r| relative_l2_error(&signals[idx], &r.solution) <= success_threshold)
        })
        .collect();

    let mut cells = vec![vec![0.0; np]; s_axis.len()];
    for (&(si, pi, _), outcome) in jobs.iter().zip(&outcomes) {
        if *outcome == Some(true) {
            cells[si][pi] += 1.0;
        }
    }
    cells.iter_mut().flatten().for_each(|c| *c /= trials as f64);
    Ok(PhaseGrid {
        s_axis: s_axis.to_vec(),
        p_axis: p_axis.to_vec(),
        cells: PhaseCells::Rate(cells),
        trials_per_cell: trials,
        success_threshold: Some(success_threshold),
        seed,
        solver_failures: outcomes.iter().filter(|o| o.is_none()).count(),
    })
}

pub fn empirical_csv(grid: &PhaseGrid) -> String {
    let mut out = String::from("S,p,success_rate,successes,trials\n");
    for (si, s) in grid.s_axis.iter().enumerate() {
        for (pi, p) in grid.p_axis.iter().enumerate() {
            let rate = grid.rate(si, pi).unwrap_or(f64::NAN);
            let successes = (rate * grid.trials_per_cell as f64).round() as usize;
            out.push_str(&format!("{s},{p},{rate},{successes},{}\n", grid.trials_per_cell));
        }
    }
    out
}

// ---------------------------------------------------------------- fig 3

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepMode {
    /// `x = x_T + λ·z_{T^c}`, decoded from `Ax`.
    Compressible,
    /// `x = x_T`, decoded from `Ax + λe`.
    Noise,
}

impl SweepMode {
    pub fn name(self) -> &'static str {
        match self {
            SweepMode::Compressible => "compressible",
            SweepMode::Noise => "noise",
        }
    }
}

/// `mean_error[i][j]` is the mean `‖Δ_p(b) − x‖₂` at `(lambda_axis[i],
/// p_axis[j])`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub lambda_axis: Vec<f64>,
    pub p_axis: Vec<f64>,
    pub mode: SweepMode,
    pub mean_error: Vec<Vec<f64>>,
    pub trials: usize,
    pub seed: u64,
}

impl SweepTable {
    /// Mean error as a function of λ for `p_axis[pi]`.
    pub fn column(&self, pi: usize) -> Vec<f64> {
        self.mean_error.iter().map(|row| row[pi]).collect()
    }
}

/// Error growth under increasing tail mass or noise.
///
/// One uniform-sphere matrix and one set of unit-norm coefficients
/// (`x_T`, and `z` or nothing depending on the mode) are drawn per
/// sweep. Trial `t` randomizes the support `T` and, in noise mode, draws
/// a unit noise vector `e`; both are then held fixed across λ.
#[allow(clippy::too_many_arguments)]
pub fn run_robustness_sweep(
    m: usize,
    n: usize,
    s: usize,
    mode: SweepMode,
    lambda_axis: &[f64],
    p_axis: &[f64],
    trials: usize,
    seed: u64,
    opts: &SolveOptions,
) -> Result<SweepTable> {
    check_p_axis(p_axis)?;
    if s == 0 || s >= n {
        return Err(Error::invalid(format!("sweep needs 1 ≤ S < N, got S={s}, N={n}")));
    }
    match lambda_axis.first() {
        Some(&l) if l == 0.0 => {}
        _ => return Err(Error::invalid("λ axis must start at 0")),
    }
    if lambda_axis.iter().any(|&l| !(l >= 0.0 && l.is_finite())) {
        return Err(Error::invalid("λ values must be finite and nonnegative"));
    }
    if trials == 0 {
        return Err(Error::invalid("trial count must be positive"));
    }
    opts.validate()?;

    let a = gen_uniform_sphere(m, n, derive_seed(seed, &[MATRIX_TAG]))?;
    let mut coeff_rng = stream_rng(seed, &[COEFF_TAG]);
    let head = sphere_point(&mut coeff_rng, s);
    let tail = sphere_point(&mut coeff_rng, n - s);
    let supports: Vec<Vec<usize>> = (0..trials)
        .map(|t| random_support(&mut stream_rng(seed, &[SUPPORT_TAG, t as u64]), n, s))
        .collect();
    let noise: Vec<Vec<f64>> = (0..trials)
        .map(|t| sphere_point(&mut stream_rng(seed, &[NOISE_TAG, t as u64]), m))
        .collect();

    let np = p_axis.len();
    let jobs: Vec<(usize, usize, usize)> = (0..lambda_axis.len())
        .flat_map(|li| (0..np).flat_map(move |pi| (0..trials).map(move |t| (li, pi, t))))
        .collect();
    let errors: Vec<f64> = jobs
        .par_iter()
        .map(|&(li, pi, t)| {
            let lambda = lambda_axis[li];
            let (x, b) = match mode {
                SweepMode::Compressible => {
                    let x = compose_mixed(&head, &tail, &supports[t], lambda, n);
                    let b = a.mul_vec(&x);
                    (x, b)
                }
                SweepMode::Noise => {
                    let x = place_on_support(&head, &supports[t], n);
                    let mut b = a.mul_vec(&x);
                    b.iter_mut().zip(&noise[t]).for_each(|(v, e)| *v += lambda * e);
                    (x, b)
                }
            };
            let o = SolveOptions { p: p_axis[pi], ..*opts };
            decode_lp(&a, &b, &o).map(|r| l2_distance(&r.solution, &x))
        })
        .collect::<Result<_>>()?;

    let mut mean_error = vec![vec![0.0; np]; lambda_axis.len()];
    for (&(li, pi, _), e) in jobs.iter().zip(&errors) {
        mean_error[li][pi] += e;
    }
    mean_error.iter_mut().flatten().for_each(|v| *v /= trials as f64);
    Ok(SweepTable {
        lambda_axis: lambda_axis.to_vec(),
        p_axis: p_axis.to_vec(),
        mode,
        mean_error,
        trials,
        seed,
    })
}

pub fn sweep_csv(tables: &[SweepTable]) -> String {
    let mut out = String::from("mode,lambda,p,mean_error\n");
    for t in tables {
        for (li, lambda) in t.lambda_axis.iter().enumerate() {
            for (pi, p) in t.p_axis.iter().enumerate() {
                out.push_str(&format!("{},{lambda},{p},{}\n", t.mode.name(), t.mean_error[li][pi]));
            }
        }
    }
    out
}

// ---------------------------------------------------------------- fig 4

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SnrRow {
    pub q: f64,
    pub p: f64,
    pub mean_snr_db: f64,
}

/// Mean reconstruction SNR of power-law signals, `q` major.
///
/// Matrix `j` is the uniform-sphere draw of stream `(seed, j)` and is
/// reused for every `q` and `p`.
pub fn run_snr_grid(
    m: usize,
    n: usize,
    q_list: &[f64],
    p_list: &[f64],
    num_matrices: usize,
    seed: u64,
    opts: &SolveOptions,
) -> Result<Vec<SnrRow>> {
    check_p_axis(p_list)?;
    if q_list.is_empty() {
        return Err(Error::invalid("q list is empty"));
    }
    if let Some(q) = q_list.iter().find(|&&q| !(q > 0.0 && q < 1.0)) {
        return Err(Error::invalid(format!("every q must lie in (0, 1), got {q}")));
    }
    if num_matrices == 0 {
        return Err(Error::invalid("matrix count must be positive"));
    }
    opts.validate()?;
    let matrices: Vec<MeasurementMatrix> = (0..num_matrices)
        .map(|j| gen_uniform_sphere(m, n, derive_seed(seed, &[MATRIX_TAG, j as u64])))
        .collect::<Result<_>>()?;
    let signals: Vec<Vec<f64>> = q_list
        .iter()
        .map(|&q| gen_powerlaw_signal(n, q))
        .collect::<Result<_>>()?;

    let np = p_list.len();
    let jobs: Vec<(usize, usize, usize)> = (0..q_list.len())
        .flat_map(|qi| (0..np).flat_map(move |pi| (0..num_matrices).map(move |j| (qi, pi, j))))
        .collect();
    let snrs: Vec<f64> = jobs
        .par_iter()
        .map(|&(qi, pi, j)| {
            let x = &signals[qi];
            let o = SolveOptions { p: p_list[pi], ..*opts };
            let r = decode_lp(&matrices[j], &matrices[j].mul_vec(x), &o)?;
            snr_db(x, &r.solution)
        })
        .collect::<Result<_>>()?;

    Ok(snrs
        .chunks(num_matrices)
        .enumerate()
        .map(|(cell, chunk)| SnrRow {
            q: q_list[cell / np],
            p: p_list[cell % np],
            mean_snr_db: mean(chunk),
        })
        .collect())
}

pub fn snr_csv(rows: &[SnrRow]) -> String {
    let mut out = String::from("q,p,mean_snr_db\n");
    for r in rows {
        out.push_str(&format!("{},{},{}\n", r.q, r.p, r.mean_snr_db));
    }
    out
}

// ------------------------------------------------------- configurations

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fig1Config {
    pub p_list: Vec<f64>,
    pub m_grid: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fig2Config {
    pub m: usize,
    pub n: usize,
    #[serde(rename = "S_axis")]
    pub s_axis: Vec<usize>,
    pub p_axis: Vec<f64>,
    pub trials: usize,
    /// Monte-Carlo supports per sparsity level for the δ profile.
    pub rip_trials: usize,
    pub success_threshold: f64,
    pub seed: u64,
    pub solver: SolveOptions,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fig3Config {
    pub m: usize,
    pub n: usize,
    #[serde(rename = "S")]
    pub s: usize,
    pub modes: Vec<SweepMode>,
    pub lambda_axis: Vec<f64>,
    pub p_axis: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    pub solver: SolveOptions,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fig4Config {
    pub m: usize,
    pub n: usize,
    pub q_list: Vec<f64>,
    pub p_list: Vec<f64>,
    pub num_matrices: usize,
    pub seed: u64,
    pub solver: SolveOptions,
}

fn grid(start: f64, step: f64, stop: f64) -> Vec<f64> {
    float_range(start, step, stop).expect("preset ranges are valid")
}

impl Fig1Config {
    pub fn preset(preset: Preset) -> Self {
        match preset {
            Preset::Desk => Fig1Config {
                p_list: vec![0.1, 0.5, 0.9],
                m_grid: grid(2.0, 0.1, 16.0),
            },
            Preset::Paper => Fig1Config {
                p_list: grid(0.1, 0.1, 1.0),
                m_grid: grid(2.0, 0.05, 20.0),
            },
        }
    }
}

impl Fig2Config {
    pub fn preset(preset: Preset, seed: u64) -> Self {
        match preset {
            Preset::Desk => Fig2Config {
                m: 50,
                n: 150,
                s_axis: (2..=24).step_by(2).collect(),
                p_axis: vec![0.25, 0.5, 0.75, 1.0],
                trials: 30,
                rip_trials: 500,
                success_threshold: DEFAULT_SUCCESS_THRESHOLD,
                seed,
                solver: desk_solver(),
            },
            Preset::Paper => Fig2Config {
                m: 100,
                n: 300,
                s_axis: (1..=49).collect(),
                p_axis: grid(0.1, 0.1, 1.0),
                trials: 50,
                rip_trials: DEFAULT_MC_TRIALS,
                success_threshold: DEFAULT_SUCCESS_THRESHOLD,
                seed,
                solver: SolveOptions::default(),
            },
        }
    }
}

impl Fig3Config {
    pub fn preset(preset: Preset, seed: u64) -> Self {
        let modes = vec![SweepMode::Compressible, SweepMode::Noise];
        match preset {
            Preset::Desk => Fig3Config {
                m: 50,
                n: 100,
                s: 10,
                modes,
                lambda_axis: grid(0.0, 0.1, 1.0),
                p_axis: vec![0.5, 1.0],
                trials: 10,
                seed,
                solver: desk_solver(),
            },
            Preset::Paper => Fig3Config {
                m: 100,
                n: 300,
                s: 40,
                modes,
                lambda_axis: grid(0.0, 0.1, 1.0),
                p_axis: grid(0.2, 0.2, 1.0),
                trials: 10,
                seed,
                solver: SolveOptions::default(),
            },
        }
    }
}

impl Fig4Config {
    pub fn preset(preset: Preset, seed: u64) -> Self {
        match preset {
            Preset::Desk => Fig4Config {
                m: 50,
                n: 100,
                q_list: vec![0.4, 0.6, 0.9],
                p_list: grid(0.3, 0.1, 1.0),
                num_matrices: 10,
                seed,
                solver: desk_solver(),
            },
            Preset::Paper => Fig4Config {
                m: 100,
                n: 200,
                q_list: grid(0.3, 0.1, 0.9),
                p_list: grid(0.1, 0.1, 1.0),
                num_matrices: 50,
                seed,
                solver: SolveOptions::default(),
            },
        }
    }
}

// ------------------------------------------------------------- outputs

/// Files written by one experiment and the number of grid cells computed.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub files: Vec<PathBuf>,
    pub cells: usize,
}

#[derive(Serialize)]
struct Sidecar<'a, C: Serialize> {
    experiment: &'a str,
    format_version: u32,
    log_base: LogBase,
    success_threshold: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    sampling: Option<&'a str>,
    config: C,
}

/// Configuration as JSON, with the solver's `p` removed because each grid
/// point substitutes its own.
fn config_value<C: Serialize>(config: &C) -> Result<serde_json::Value> {
    let mut value = serde_json::to_value(config)?;
    if let Some(solver) = value.get_mut("solver").and_then(|s| s.as_object_mut()) {
        solver.remove("p");
    }
    Ok(value)
}

fn write_pair<C: Serialize>(
    dir: &Path,
    stem: &str,
    csv: &str,
    experiment: &str,
    success_threshold: Option<f64>,
    sampling: Option<&str>,
    config: &C,
) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let csv_path = dir.join(format!("{stem}.csv"));
    let json_path = dir.join(format!("{stem}.json"));
    fs::write(&csv_path, csv)?;
    let sidecar = Sidecar {
        experiment,
        format_version: FORMAT_VERSION,
        log_base: CP_LOG_BASE,
        success_threshold,
        sampling,
        config: config_value(config)?,
    };
    let mut json = serde_json::to_string_pretty(&sidecar)?;
    json.push('\n');
    fs::write(&json_path, json)?;
    Ok(vec![csv_path, json_path])
}

pub fn write_fig1(dir: &Path, cfg: &Fig1Config) -> Result<RunSummary> {
    let rows = run_condition_curves(&cfg.p_list, &cfg.m_grid)?;
    let files = write_pair(dir, "fig1_conditions", &conditions_csv(&rows), "fig1", None, None, cfg)?;
    Ok(RunSummary { files, cells: rows.len() })
}

pub fn write_fig2(dir: &Path, cfg: &Fig2Config) -> Result<RunSummary> {
    let a = phase_matrix(cfg.m, cfg.n, cfg.seed)?;
    let theory = run_theoretical_phase_detailed(&a, &cfg.s_axis, &cfg.p_axis, cfg.rip_trials, cfg.seed)?;
    let empirical = run_phase_diagram(
        cfg.m,
        cfg.n,
        &cfg.s_axis,
        &cfg.p_axis,
        cfg.trials,
        cfg.success_threshold,
        cfg.seed,
        &cfg.solver,
    )?;
    let mut files = write_pair(dir, "fig2_theoretical", &theoretical_csv(&theory), "fig2", None, None, cfg)?;
    files.extend(write_pair(
        dir,
        "fig2_empirical",
        &empirical_csv(&empirical),
        "fig2",
        Some(cfg.success_threshold),
        None,
        cfg,
    )?);
    Ok(RunSummary {
        files,
        cells: theory.grid.cell_count() + empirical.cell_count(),
    })
}

/// How the fig3 sweep draws its randomness, stored in the sidecar.
pub const FIG3_SAMPLING: &str = "head and tail coefficients drawn once per sweep; \
support and unit-norm noise redrawn per trial and shared across lambda and p";

pub fn write_fig3(dir: &Path, cfg: &Fig3Config) -> Result<RunSummary> {
    if cfg.modes.is_empty() {
        return Err(Error::invalid("at least one sweep mode is required"));
    }
    let tables = cfg
        .modes
        .iter()
        .map(|&mode| {
            run_robustness_sweep(
                cfg.m,
                cfg.n,
                cfg.s,
                mode,
                &cfg.lambda_axis,
                &cfg.p_axis,
                cfg.trials,
                cfg.seed,
                &cfg.solver,
            )
        })
        .collect::<Result<Vec<_>>>()?;
    let files = write_pair(dir, "fig3_sweep", &sweep_csv(&tables), "fig3", None, Some(FIG3_SAMPLING), cfg)?;
    Ok(RunSummary {
        files,
        cells: tables.len() * cfg.lambda_axis.len() * cfg.p_axis.len(),
    })
}

pub fn write_fig4(dir: &Path, cfg: &Fig4Config) -> Result<RunSummary> {
    let rows = run_snr_grid(cfg.m, cfg.n, &cfg.q_list, &cfg.p_list, cfg.num_matrices, cfg.seed, &cfg.solver)?;
    let files = write_pair(dir, "fig4_snr", &snr_csv(&rows), "fig4", None, None, cfg)?;
    Ok(RunSummary { files, cells: rows.len() })
}
