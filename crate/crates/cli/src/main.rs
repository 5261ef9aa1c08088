//! `lpdecode` command-line front end.
//!
//! Exit codes: 0 success, 1 usage error, 2 numerical or validation
//! failure, 3 I/O or file-format error.

mod args;

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use lpdecode::certify::{certify_recovery, check_condition_p, constant_c1, constant_c2};
use lpdecode::decode::{
    decode_irls, decode_l0_oracle, decode_lp, decode_lp_eps, SolveOptions, DEFAULT_SUCCESS_THRESHOLD,
};
use lpdecode::ensembles::{gen_gaussian, gen_uniform_sphere, MeasurementMatrix, SignalKind, SignalSpec};
use lpdecode::experiments::{
    write_fig1, write_fig2, write_fig3, write_fig4, Fig1Config, Fig2Config, Fig3Config, Fig4Config,
    Preset, RunSummary, SweepMode,
};
use lpdecode::io::{read_matrix_binary, read_matrix_csv, read_vector_csv, write_matrix_binary, write_matrix_csv, write_vector_csv};
use lpdecode::pconvex::{d1_gap_check, lq_empirical};
use lpdecode::rip::{profile_pairs, rip_delta_exact_capped, rip_delta_mc, rip_profile, DEFAULT_EXHAUSTIVE_CAP, DEFAULT_MC_TRIALS};
use lpdecode::Error;

use args::{confined, parse_f64_list, parse_usize_list};

#[derive(Debug, Clone)]
struct Floats(Vec<f64>);

#[derive(Debug, Clone)]
struct Ints(Vec<usize>);

fn floats(s: &str) -> Result<Floats, String> {
    parse_f64_list(s).map(Floats)
}

fn ints(s: &str) -> Result<Ints, String> {
    parse_usize_list(s).map(Ints)
}

#[derive(Parser, Debug)]
#[command(name = "lpdecode", version, about = "Sparse recovery with lp quasinorm decoders")]
struct Cli {
    /// Directory that receives every output file.
    #[arg(long, global = true, default_value = ".")]
    out_dir: PathBuf,
    /// Worker threads (default: all available cores). Results do not
    /// depend on this value.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Draw a random measurement matrix.
    GenMatrix(GenMatrixArgs),
    /// Draw a test signal.
    GenSignal(GenSignalArgs),
    /// Estimate restricted isometry constants.
    Rip(RipArgs),
    /// Evaluate the recovery condition and its constants.
    Certify(CertifyArgs),
    /// Decode observations b = Ax (+ e).
    Decode(DecodeArgs),
    /// Run one of the experiment grids.
    Experiment(ExperimentArgs),
    /// Sampled LQp level and d1 consistency check.
    LqCheck(LqCheckArgs),
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum EnsembleArg {
    Gaussian,
    UniformSphere,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq)]
enum MatrixFormat {
    Binary,
    Csv,
}

#[derive(Args, Debug)]
struct GenMatrixArgs {
    #[arg(long = "M")]
    m: usize,
    #[arg(long = "N")]
    n: usize,
    #[arg(long, value_enum, default_value = "gaussian")]
    ensemble: EnsembleArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "binary")]
    format: MatrixFormat,
    /// Output file name inside --out-dir.
    #[arg(long)]
    out: PathBuf,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum SignalKindArg {
    Sparse,
    Powerlaw,
    Mixed,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum VectorFormat {
    Csv,
    Json,
}

#[derive(Args, Debug)]
struct GenSignalArgs {
    #[arg(long = "N")]
    n: usize,
    #[arg(long, value_enum, default_value = "sparse")]
    kind: SignalKindArg,
    /// Sparsity (sparse and mixed signals).
    #[arg(long = "S")]
    s: Option<usize>,
    /// Power-law exponent in (0, 1].
    #[arg(long)]
    q: Option<f64>,
    /// Tail weight of a mixed signal.
    #[arg(long, default_value_t = 0.0)]
    lambda: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "csv")]
    format: VectorFormat,
    /// Output file name inside --out-dir (default: standard output).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq)]
enum RipMethodArg {
    Mc,
    Exact,
}

#[derive(Args, Debug)]
struct RipArgs {
    /// Matrix file (.lprm binary, or .csv).
    #[arg(long)]
    matrix: PathBuf,
    /// Sparsity levels, `a,b,c` or `start:step:stop`.
    #[arg(long = "S", value_parser = ints)]
    s: Ints,
    #[arg(long, value_enum, default_value = "mc")]
    method: RipMethodArg,
    /// Monte-Carlo supports per level.
    #[arg(long, default_value_t = DEFAULT_MC_TRIALS)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Maximum number of subsets visited by the exact method.
    #[arg(long, default_value_t = DEFAULT_EXHAUSTIVE_CAP)]
    cap: u64,
    /// Report the nondecreasing profile 1..=max(S) instead (Monte-Carlo).
    #[arg(long)]
    profile: bool,
}

#[derive(Args, Debug)]
struct CertifyArgs {
    /// Exponents, `a,b,c` or `start:step:stop`.
    #[arg(long, value_parser = floats)]
    p: Floats,
    /// Matrix whose Monte-Carlo δ profile is certified.
    #[arg(long, requires = "s")]
    matrix: Option<PathBuf>,
    /// Sparsity levels for --matrix.
    #[arg(long = "S", value_parser = ints)]
    s: Option<Ints>,
    #[arg(long, default_value_t = DEFAULT_MC_TRIALS)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Without --matrix: the ratio k.
    #[arg(long, conflicts_with = "matrix")]
    k: Option<f64>,
    /// Without --matrix: δ_kS.
    #[arg(long = "delta-kS", conflicts_with = "matrix")]
    delta_ks: Option<f64>,
    /// Without --matrix: δ_(k+1)S.
    #[arg(long = "delta-k1S", conflicts_with = "matrix")]
    delta_k1s: Option<f64>,
}

#[derive(Args, Debug)]
struct SolverArgs {
    /// Initial smoothing (default: largest entry of the least-norm start).
    #[arg(long)]
    eps0: Option<f64>,
    #[arg(long, default_value_t = 0.99)]
    eps_decay: f64,
    #[arg(long, default_value = "1e-9")]
    eps_min: f64,
    #[arg(long, default_value_t = 3000)]
    max_outer: usize,
    #[arg(long, default_value_t = 200)]
    max_inner: usize,
    #[arg(long, default_value = "1e-8")]
    grad_tol: f64,
    #[arg(long, default_value_t = 1.0)]
    step_init: f64,
    #[arg(long, default_value_t = 0.5)]
    backtrack: f64,
    #[arg(long, default_value = "1e-4")]
    armijo: f64,
}

impl SolverArgs {
    fn options(&self, p: f64, seed: u64) -> SolveOptions {
        SolveOptions {
            p,
            eps0: self.eps0,
            eps_decay: self.eps_decay,
            eps_min: self.eps_min,
            max_outer: self.max_outer,
            max_inner: self.max_inner,
            grad_tol: self.grad_tol,
            step_init: self.step_init,
            backtrack: self.backtrack,
            armijo: self.armijo,
            seed,
            record_history: false,
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq)]
enum DecodeMode {
    /// Smoothed projected gradient, Ay = b.
    Lp,
    /// Iteratively reweighted least squares, Ay = b.
    Irls,
    /// Penalty path, ‖Ay − b‖₂ ≤ eta.
    LpEps,
    /// Brute-force sparsest solution (tiny problems only).
    L0,
}

#[derive(Args, Debug)]
struct DecodeArgs {
    #[arg(long)]
    matrix: PathBuf,
    /// Observation vector (CSV).
    #[arg(long)]
    obs: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    p: f64,
    #[arg(long, value_enum, default_value = "lp")]
    mode: DecodeMode,
    /// Noise level for --mode lp-eps.
    #[arg(long, default_value_t = 0.0)]
    eta: f64,
    /// Largest support size tried by --mode l0.
    #[arg(long, default_value_t = 4)]
    s_max: usize,
    /// Residual tolerance of --mode l0.
    #[arg(long, default_value = "1e-9")]
    res_tol: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Include the per-level (ε, objective, residual) history.
    #[arg(long)]
    history: bool,
    /// Also write the solution vector (CSV) to this file inside --out-dir.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum Figure {
    Fig1,
    Fig2,
    Fig3,
    Fig4,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum PresetArg {
    Desk,
    Paper,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum ModeArg {
    Compressible,
    Noise,
    Both,
}

/// Grid flags override the preset; unset flags keep the preset values.
#[derive(Args, Debug)]
struct ExperimentArgs {
    #[arg(value_enum)]
    figure: Figure,
    #[arg(long, value_enum, default_value = "desk")]
    preset: PresetArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Exponent grid.
    #[arg(long, value_parser = floats)]
    p: Option<Floats>,
    /// fig1: ratio grid m ≥ 2.
    #[arg(long, value_parser = floats)]
    m: Option<Floats>,
    /// Rows M of the measurement matrix.
    #[arg(long)]
    rows: Option<usize>,
    /// Columns N of the measurement matrix.
    #[arg(long)]
    cols: Option<usize>,
    /// fig2: sparsity axis; fig3: the sparsity (first value).
    #[arg(long = "S", value_parser = ints)]
    s: Option<Ints>,
    /// fig3: λ axis (must start at 0).
    #[arg(long, value_parser = floats)]
    lambda: Option<Floats>,
    /// fig4: power-law exponents in (0, 1).
    #[arg(long, value_parser = floats)]
    q: Option<Floats>,
    /// fig3: which sweep(s) to run.
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    /// fig2: decodes per cell; fig3: trials per λ.
    #[arg(long)]
    trials: Option<usize>,
    /// fig2: Monte-Carlo supports per δ level.
    #[arg(long)]
    rip_trials: Option<usize>,
    /// fig4: number of matrices.
    #[arg(long)]
    matrices: Option<usize>,
    /// fig2: relative ℓ2 error counted as success.
    #[arg(long)]
    success_threshold: Option<f64>,
    #[arg(long)]
    eps_decay: Option<f64>,
    #[arg(long)]
    eps_min: Option<f64>,
    #[arg(long)]
    max_outer: Option<usize>,
    #[arg(long)]
    max_inner: Option<usize>,
    #[arg(long)]
    grad_tol: Option<f64>,
}

impl ExperimentArgs {
    fn solver(&self, mut base: SolveOptions) -> SolveOptions {
        if let Some(v) = self.eps_decay {
            base.eps_decay = v;
        }
        if let Some(v) = self.eps_min {
            base.eps_min = v;
        }
        if let Some(v) = self.max_outer {
            base.max_outer = v;
        }
        if let Some(v) = self.max_inner {
            base.max_inner = v;
        }
        if let Some(v) = self.grad_tol {
            base.grad_tol = v;
        }
        base
    }
}

#[derive(Args, Debug)]
struct LqCheckArgs {
    #[arg(long)]
    matrix: PathBuf,
    #[arg(long, value_parser = floats)]
    p: Floats,
    #[arg(long, default_value_t = 200)]
    directions: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Also run the d1 consistency check.
    #[arg(long)]
    d1: bool,
    /// Per-direction CSV for each p, written as `<name>_p<p>.csv` inside
    /// --out-dir.
    #[arg(long)]
    dump: Option<PathBuf>,
    #[command(flatten)]
    solver: SolverArgs,
}

enum Failure {
    Usage(String),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Lib(Error::Io(e))
    }
}

type CliResult<T> = Result<T, Failure>;

fn usage<T>(msg: impl Into<String>) -> CliResult<T> {
    Err(Failure::Usage(msg.into()))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be positive");
            return ExitCode::from(1);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot configure thread pool: {e}");
            return ExitCode::from(2);
        }
    }
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_io() { 3 } else { 2 })
        }
    }
}

fn run(cli: &Cli) -> CliResult<()> {
    let out_dir = cli.out_dir.as_path();
    match &cli.command {
        Command::GenMatrix(a) => gen_matrix(out_dir, a),
        Command::GenSignal(a) => gen_signal(out_dir, a),
        Command::Rip(a) => rip(a),
        Command::Certify(a) => certify(a),
        Command::Decode(a) => decode(out_dir, a),
        Command::Experiment(a) => experiment(out_dir, a),
        Command::LqCheck(a) => lq_check(out_dir, a),
    }
}

fn output_file(out_dir: &Path, name: &Path) -> CliResult<BufWriter<File>> {
    let path = confined(out_dir, name).map_err(Failure::Usage)?;
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    Ok(BufWriter::new(File::create(&path)?))
}

fn print_json<T: serde::Serialize>(value: &T) -> CliResult<()> {
    let text = serde_json::to_string_pretty(value).map_err(Error::from)?;
    let mut out = std::io::stdout().lock();
    match writeln!(out, "{text}").and_then(|_| out.flush()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn open(path: &Path) -> CliResult<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| std::io::Error::new(e.kind(), format!("{}: {e}", path.display())).into())
}

fn load_matrix(path: &Path) -> CliResult<MeasurementMatrix> {
    let file = open(path)?;
    let is_csv = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"));
    Ok(if is_csv { read_matrix_csv(file)? } else { read_matrix_binary(file)? })
}

fn load_vector(path: &Path) -> CliResult<Vec<f64>> {
    Ok(read_vector_csv(open(path)?)?)
}

fn gen_matrix(out_dir: &Path, a: &GenMatrixArgs) -> CliResult<()> {
    let matrix = match a.ensemble {
        EnsembleArg::Gaussian => gen_gaussian(a.m, a.n, a.seed)?,
        EnsembleArg::UniformSphere => gen_uniform_sphere(a.m, a.n, a.seed)?,
    };
    let w = output_file(out_dir, &a.out)?;
    match a.format {
        MatrixFormat::Binary => write_matrix_binary(w, &matrix)?,
        MatrixFormat::Csv => write_matrix_csv(w, &matrix)?,
    }
    Ok(())
}

fn gen_signal(out_dir: &Path, a: &GenSignalArgs) -> CliResult<()> {
    let need_s = || a.s.ok_or_else(|| Failure::Usage("--S is required for this signal kind".into()));
    let kind = match a.kind {
        SignalKindArg::Sparse => SignalKind::ExactSparse { s: need_s()? },
        SignalKindArg::Mixed => SignalKind::Mixed { s: need_s()?, lambda: a.lambda },
        SignalKindArg::Powerlaw => SignalKind::PowerLaw {
            q: a.q.ok_or_else(|| Failure::Usage("--q is required for power-law signals".into()))?,
        },
    };
    let spec = SignalSpec { n: a.n, kind, seed: a.seed };
    let x = spec.generate()?;
    let mut w: Box<dyn Write> = match &a.out {
        Some(name) => Box::new(output_file(out_dir, name)?),
        None => Box::new(std::io::stdout().lock()),
    };
    match a.format {
        VectorFormat::Csv => write_vector_csv(&mut w, &x)?,
        VectorFormat::Json => {
            let text = serde_json::to_string_pretty(&json!({ "spec": spec, "x": x })).map_err(Error::from)?;
            writeln!(w, "{text}")?;
            w.flush()?;
        }
    }
    Ok(())
}

fn rip(a: &RipArgs) -> CliResult<()> {
    let matrix = load_matrix(&a.matrix)?;
    if a.s.0.is_empty() {
        return usage("--S needs at least one level");
    }
    if a.profile {
        let top = *a.s.0.iter().max().unwrap();
        return print_json(&rip_profile(&matrix, top, a.trials, a.seed)?);
    }
    let mut out = Vec::new();
    for &s in &a.s.0 {
        out.push(match a.method {
            RipMethodArg::Mc => serde_json::to_value(rip_delta_mc(&matrix, s, a.trials, a.seed)?),
            RipMethodArg::Exact => {
                let delta = rip_delta_exact_capped(&matrix, s, a.cap)?;
                Ok(json!({ "S": s, "delta": delta, "method": "exhaustive" }))
            }
        }
        .map_err(Error::from)?);
    }
    print_json(&out)
}

fn certify(a: &CertifyArgs) -> CliResult<()> {
    if let Some(path) = &a.matrix {
        let matrix = load_matrix(path)?;
        let levels = &a.s.as_ref().expect("clap enforces --S").0;
        let top = matrix.rows().min(matrix.cols());
        let pairs = profile_pairs(&rip_profile(&matrix, top, a.trials, a.seed)?);
        let mut out = Vec::new();
        for &s in levels {
            for &p in &a.p.0 {
                out.push(certify_recovery(&pairs, s, p)?);
            }
        }
        return print_json(&out);
    }
    let (Some(k), Some(d1), Some(d2)) = (a.k, a.delta_ks, a.delta_k1s) else {
        return usage("give either --matrix with --S, or all of --k, --delta-kS and --delta-k1S");
    };
    let mut out = Vec::new();
    for &p in &a.p.0 {
        let satisfied = check_condition_p(d1, d2, k, p);
        let (c1, c2) = if satisfied {
            (Some(constant_c1(p, k, d1, d2)?), Some(constant_c2(p, k, d1, d2)?))
        } else {
            (None, None)
        };
        out.push(json!({
            "p": p, "k": k, "delta_kS": d1, "delta_k1S": d2,
            "satisfied": satisfied, "C1": c1, "C2": c2,
        }));
    }
    print_json(&out)
}

fn decode(out_dir: &Path, a: &DecodeArgs) -> CliResult<()> {
    let matrix = load_matrix(&a.matrix)?;
    let b = load_vector(&a.obs)?;
    let mut opts = a.solver.options(a.p, a.seed);
    opts.record_history = a.history;
    let (solution, report) = match a.mode {
        DecodeMode::L0 => {
            let sol = decode_l0_oracle(&matrix, &b, a.s_max, a.res_tol)?;
            (sol.solution.clone(), serde_json::to_value(sol))
        }
        mode => {
            let r = match mode {
                DecodeMode::Lp => decode_lp(&matrix, &b, &opts)?,
                DecodeMode::Irls => decode_irls(&matrix, &b, &opts)?,
                _ => decode_lp_eps(&matrix, &b, a.eta, &opts)?,
            };
            (r.solution.clone(), serde_json::to_value(r))
        }
    };
    if let Some(name) = &a.out {
        write_vector_csv(output_file(out_dir, name)?, &solution)?;
    }
    print_json(&report.map_err(Error::from)?)
}

fn experiment(out_dir: &Path, a: &ExperimentArgs) -> CliResult<()> {
    let preset = match a.preset {
        PresetArg::Desk => Preset::Desk,
        PresetArg::Paper => Preset::Paper,
    };
    let start = Instant::now();
    let summary: RunSummary = match a.figure {
        Figure::Fig1 => {
            let mut cfg = Fig1Config::preset(preset);
            if let Some(p) = &a.p {
                cfg.p_list = p.0.clone();
            }
            if let Some(m) = &a.m {
                cfg.m_grid = m.0.clone();
            }
            write_fig1(out_dir, &cfg)?
        }
        Figure::Fig2 => {
            let mut cfg = Fig2Config::preset(preset, a.seed);
            cfg.m = a.rows.unwrap_or(cfg.m);
            cfg.n = a.cols.unwrap_or(cfg.n);
            if let Some(s) = &a.s {
                cfg.s_axis = s.0.clone();
            }
            if let Some(p) = &a.p {
                cfg.p_axis = p.0.clone();
            }
            cfg.trials = a.trials.unwrap_or(cfg.trials);
            cfg.rip_trials = a.rip_trials.unwrap_or(cfg.rip_trials);
            cfg.success_threshold = a.success_threshold.unwrap_or(DEFAULT_SUCCESS_THRESHOLD);
            cfg.solver = a.solver(cfg.solver);
            write_fig2(out_dir, &cfg)?
        }
        Figure::Fig3 => {
            let mut cfg = Fig3Config::preset(preset, a.seed);
            cfg.m = a.rows.unwrap_or(cfg.m);
            cfg.n = a.cols.unwrap_or(cfg.n);
            if let Some(s) = a.s.as_ref().and_then(|s| s.0.first()) {
                cfg.s = *s;
            }
            if let Some(l) = &a.lambda {
                cfg.lambda_axis = l.0.clone();
            }
            if let Some(p) = &a.p {
                cfg.p_axis = p.0.clone();
            }
            match a.mode {
                Some(ModeArg::Compressible) => cfg.modes = vec![SweepMode::Compressible],
                Some(ModeArg::Noise) => cfg.modes = vec![SweepMode::Noise],
                Some(ModeArg::Both) | None => {}
            }
            cfg.trials = a.trials.unwrap_or(cfg.trials);
            cfg.solver = a.solver(cfg.solver);
            write_fig3(out_dir, &cfg)?
        }
        Figure::Fig4 => {
            let mut cfg = Fig4Config::preset(preset, a.seed);
            cfg.m = a.rows.unwrap_or(cfg.m);
            cfg.n = a.cols.unwrap_or(cfg.n);
            if let Some(q) = &a.q {
                cfg.q_list = q.0.clone();
            }
            if let Some(p) = &a.p {
                cfg.p_list = p.0.clone();
            }
            cfg.num_matrices = a.matrices.unwrap_or(cfg.num_matrices);
            cfg.solver = a.solver(cfg.solver);
            write_fig4(out_dir, &cfg)?
        }
    };
    let names: Vec<String> = summary.files.iter().map(|f| f.display().to_string()).collect();
    println!(
        "{} cells in {:.2}s -> {}",
        summary.cells,
        start.elapsed().as_secs_f64(),
        names.join(", ")
    );
    Ok(())
}

fn lq_check(out_dir: &Path, a: &LqCheckArgs) -> CliResult<()> {
    let matrix = load_matrix(&a.matrix)?;
    let mut out = Vec::new();
    for &p in &a.p.0 {
        let opts = a.solver.options(p, a.seed);
        let est = lq_empirical(&matrix, p, a.directions, a.seed, &opts)?;
        if let Some(name) = &a.dump {
            let stem = name.to_string_lossy().trim_end_matches(".csv").to_string();
            let mut w = output_file(out_dir, Path::new(&format!("{stem}_p{p}.csv")))?;
            w.write_all(est.per_direction_csv().as_bytes())?;
            w.flush()?;
        }
        let d1 = if a.d1 {
            Some(d1_gap_check(&matrix, p, a.directions, a.seed, &opts)?)
        } else {
            None
        };
        out.push(json!({
            "p": p,
            "alpha_hat": est.alpha_hat,
            "directions": est.directions,
            "seed": est.seed,
            "d1": d1,
        }));
    }
    print_json(&out)
}
