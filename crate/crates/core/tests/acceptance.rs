//! Acceptance suite: one pass/fail line per criterion, nonzero exit if
//! any criterion fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use lpdecode::certify::*;
use lpdecode::decode::*;
use lpdecode::ensembles::*;
use lpdecode::experiments::*;
use lpdecode::io::write_matrix_binary;
use lpdecode::metrics::{l2_norm, relative_l2_error, support};
use lpdecode::pconvex::*;
use lpdecode::rip::*;
use lpdecode::rng::stream_rng;

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn normals(seed: u64, len: usize) -> Vec<f64> {
    let mut rng = stream_rng(seed, &[0xacce]);
    (0..len).map(|_| rng.sample(StandardNormal)).collect()
}

fn constants_regression() -> Outcome {
    let cases = [
        ("C1(1,3,.2,.2)", constant_c1(1.0, 3.0, 0.2, 0.2), 12.04),
        ("C2(1,3,.2,.2)", constant_c2(1.0, 3.0, 0.2, 0.2), 8.77),
        ("C1(.5,3,.5,.5)", constant_c1(0.5, 3.0, 0.5, 0.5), 5.31),
        ("C2(.5,3,.5,.5)", constant_c2(0.5, 3.0, 0.5, 0.5), 4.31),
    ];
    let mut detail = Vec::new();
    for (name, value, expected) in cases {
        let v = value.map_err(|e| format!("{name}: {e}"))?;
        check((v - expected).abs() <= 0.01, || format!("{name} = {v}, expected {expected} ± 0.01"))?;
        detail.push(format!("{name}={v:.4}"));
    }
    Ok(detail.join(" "))
}

fn threshold_identities() -> Outcome {
    let f = threshold_f(3.0, 0.5);
    check((f - 7.0 / 9.0).abs() < 1e-12, || format!("f(3, 0.5) = {f}"))?;
    for p in float_range(0.1, 0.1, 1.0).unwrap() {
        let v = threshold_f(2.0, p);
        check(v == 0.0, || format!("f(2, {p}) = {v}"))?;
    }
    let s = sparsity_transfer(3, 4.0, 2.0 / 3.0).map_err(|e| e.to_string())?;
    check(s == 5, || format!("sparsity_transfer(3, 4, 2/3) = {s}"))?;
    Ok(format!("f(3,.5)-7/9={:.1e}, transfer=5", f - 7.0 / 9.0))
}

fn formula_consistency() -> Outcome {
    let mut worst: f64 = 0.0;
    for i in 0..20 {
        let p = 0.05 + 0.9 * i as f64 / 19.0;
        let cpq = constant_cpq(p, 2.0).map_err(|e| e.to_string())?;
        let cp = constant_cp(p);
        let rel = if cpq.is_finite() && cp.is_finite() {
            (cpq - cp).abs() / cp
        } else {
            // Both overflow f64 for the smallest p; compare logarithms.
            let (a, b) = (ln_constant_cpq(p, 2.0).map_err(|e| e.to_string())?, ln_constant_cp(p));
            (a - b).abs() / b.abs().max(1.0)
        };
        check(rel <= 1e-10, || format!("C_(p,2) vs C(p) at p={p}: relative gap {rel}"))?;
        worst = worst.max(rel);
    }
    for (m, n) in [(10, 20), (50, 150), (100, 300), (7, 1000)] {
        for mu in [0.1, 0.3, 0.5, 0.7] {
            let a = lq_alpha(m, n, mu, 1.0).map_err(|e| e.to_string())?;
            let expected = mu * ((n as f64 / m as f64).ln() / m as f64).sqrt();
            check((a - expected).abs() < 1e-12, || format!("lq_alpha({m},{n},{mu},1) = {a} vs {expected}"))?;
        }
    }
    Ok(format!("max relative C gap {worst:.1e}"))
}

fn oracle_equivalence() -> Outcome {
    let (m, n, s, p) = (10, 20, 2, 0.5);
    let opts = SolveOptions::with_p(p);
    let (mut successes, mut mismatches) = (0, Vec::new());
    for inst in 0..50u64 {
        let a = gen_gaussian(m, n, 5000 + inst).unwrap();
        let x = gen_sparse_signal(n, s, 6000 + inst).unwrap();
        let b = a.mul_vec(&x);
        let report = decode_lp(&a, &b, &opts).map_err(|e| format!("instance {inst}: {e}"))?;
        if relative_l2_error(&x, &report.solution) <= DEFAULT_SUCCESS_THRESHOLD {
            successes += 1;
            let l0 = decode_l0_oracle(&a, &b, 4, 1e-9 * (1.0 + l2_norm(&b))).map_err(|e| e.to_string())?;
            if support(&report.solution, 1e-6) != l0.support {
                mismatches.push(inst);
            }
        }
    }
    check(successes >= 45, || format!("{successes}/50 recovered, need ≥ 45"))?;
    check(mismatches.is_empty(), || format!("support mismatch on instances {mismatches:?}"))?;
    Ok(format!("{successes}/50 recovered, all supports match Δ0"))
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut c: Vec<usize> = (0..k).collect();
    loop {
        out.push(c.clone());
        let Some(i) = (0..k).rev().find(|&i| c[i] < n - k + i) else {
            return out;
        };
        c[i] += 1;
        for j in i + 1..k {
            c[j] = c[j - 1] + 1;
        }
    }
}

fn l1_vertex_oracle(a: &MeasurementMatrix, b: &[f64]) -> f64 {
    let m = a.rows();
    let full = a.to_dmatrix();
    let rhs = DVector::from_column_slice(b);
    combinations(a.cols(), m)
        .into_iter()
        .filter_map(|cols| {
            let sub = DMatrix::from_fn(m, m, |i, j| full[(i, cols[j])]);
            if sub.determinant().abs() < 1e-12 {
                return None;
            }
            sub.lu().solve(&rhs).map(|z| z.iter().map(|v| v.abs()).sum::<f64>())
        })
        .fold(f64::INFINITY, f64::min)
}

fn convex_cross_check() -> Outcome {
    let mut worst: f64 = 0.0;
    for inst in 0..20u64 {
        let a = gen_gaussian(5, 10, 7000 + inst).unwrap();
        let b = normals(inst, 5);
        let report = decode_lp(&a, &b, &SolveOptions::with_p(1.0)).map_err(|e| e.to_string())?;
        let oracle = l1_vertex_oracle(&a, &b);
        let rel = (report.objective_p - oracle).abs() / oracle;
        check(rel <= 1e-4, || format!("instance {inst}: solver {} vs oracle {oracle}", report.objective_p))?;
        worst = worst.max(rel);
    }
    Ok(format!("max relative objective gap {worst:.1e}"))
}

fn robustness_linearity() -> Outcome {
    let lambda = float_range(0.0, 0.1, 1.0).unwrap();
    let mut detail = Vec::new();
    for mode in [SweepMode::Compressible, SweepMode::Noise] {
        let table = run_robustness_sweep(50, 100, 10, mode, &lambda, &[0.5, 1.0], 10, 2024, &desk_solver())
            .map_err(|e| e.to_string())?;
        for (pi, p) in table.p_axis.iter().enumerate() {
            let fit = linear_fit(&lambda, &table.column(pi)).map_err(|e| e.to_string())?;
            check(fit.r_squared >= 0.9 && fit.slope >= 0.0, || {
                format!("{} p={p}: R²={:.4}, slope={:.4}", mode.name(), fit.r_squared, fit.slope)
            })?;
            detail.push(format!("{} p={p} R²={:.4}", mode.name(), fit.r_squared));
        }
    }
    Ok(detail.join(", "))
}

fn phase_ordering() -> Outcome {
    let s_axis = [14, 16, 18, 20, 22];
    let grid = run_phase_diagram(50, 150, &s_axis, &[0.5, 1.0], 30, DEFAULT_SUCCESS_THRESHOLD, 2024, &desk_solver())
        .map_err(|e| e.to_string())?;
    let gaps: Vec<(usize, f64, f64)> = s_axis
        .iter()
        .enumerate()
        .map(|(si, &s)| (s, grid.rate(si, 0).unwrap(), grid.rate(si, 1).unwrap()))
        .collect();
    let best = gaps.iter().map(|(_, a, b)| a - b).fold(f64::NEG_INFINITY, f64::max);
    let table = gaps
        .iter()
        .map(|(s, a, b)| format!("S={s}:{a:.2}/{b:.2}"))
        .collect::<Vec<_>>()
        .join(" ");
    check(best >= 0.1, || format!("largest rate(0.5) − rate(1) is {best:.3}; {table}"))?;
    Ok(format!("max gap {best:.2} (p=.5/p=1 {table})"))
}

fn snr_trend() -> Outcome {
    let p_list = float_range(0.3, 0.1, 1.0).unwrap();
    let rows = run_snr_grid(50, 100, &[0.4, 0.9], &p_list, 10, 2024, &desk_solver()).map_err(|e| e.to_string())?;
    let of_q = |q: f64| rows.iter().filter(move |r| r.q == q);
    let best = of_q(0.4).max_by(|a, b| a.mean_snr_db.total_cmp(&b.mean_snr_db)).unwrap();
    check(best.p <= 0.8, || format!("q=0.4: best p is {}", best.p))?;
    let band: Vec<f64> = of_q(0.9).filter(|r| r.p >= 0.5).map(|r| r.mean_snr_db).collect();
    let spread = band.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - band.iter().cloned().fold(f64::INFINITY, f64::min);
    check(spread <= 3.0, || format!("q=0.9: SNR spread over p ∈ [0.5, 1] is {spread:.2} dB"))?;
    Ok(format!("q=0.4 best p={} ({:.1} dB), q=0.9 spread {spread:.2} dB", best.p, best.mean_snr_db))
}

fn appendix_properties() -> Outcome {
    let mut rng = stream_rng(99, &[]);
    for set in 0..10_000 {
        let m = rng.random_range(1..=64);
        let n = rng.random_range(1..=32);
        let points: Vec<Vec<f64>> = (0..m)
            .map(|_| (0..n).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect();
        let r = balance_signs(&points).map_err(|e| e.to_string())?;
        let bound: f64 = points.iter().map(|x| l2_norm(x).powi(2)).sum();
        check(r.achieved_norm.powi(2) <= bound * (1.0 + 1e-12), || {
            format!("set {set}: achieved² {} > Σ‖x‖² {bound}", r.achieved_norm.powi(2))
        })?;
    }
    for (m, n) in [(1, 1), (3, 5), (8, 8), (16, 32)] {
        let basis: Vec<Vec<f64>> = (0..m)
            .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        let r = balance_signs(&basis).map_err(|e| e.to_string())?;
        check(r.achieved_norm == (m as f64).sqrt(), || format!("orthonormal m={m}: {}", r.achieved_norm))?;
    }
    for (i, p) in (0..100_000).zip([0.3, 0.5, 0.9].into_iter().cycle()) {
        let n = rng.random_range(1..=16);
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(-10.0..10.0)).collect();
        let y: Vec<f64> = (0..n).map(|_| rng.random_range(-10.0..10.0)).collect();
        check(check_p_subadditivity(&x, &y, p).unwrap(), || format!("pair {i} violates subadditivity at p={p}"))?;
    }
    let a = gen_gaussian(8, 24, 2024).unwrap();
    let mut ratios = Vec::new();
    for p in [0.3, 0.5, 0.9] {
        let rec = d1_gap_check(&a, p, 200, 2024, &desk_solver()).map_err(|e| e.to_string())?;
        check(!rec.violated, || format!("d1 check violated at p={p}: {rec:?}"))?;
        ratios.push(format!("p={p}: {:.2}≤{:.3e}", rec.d1_p_hat, rec.bound));
    }
    Ok(format!("10^4 sets, 10^5 pairs, d1 {}", ratios.join(", ")))
}

fn rip_correctness() -> Outcome {
    let q = DMatrix::<f64>::from_fn(9, 4, |i, j| normals(i as u64 * 4 + j as u64, 1)[0]).qr().q();
    let columns: Vec<Vec<f64>> = (0..4).map(|j| q.column(j).iter().copied().collect()).collect();
    for a in [MeasurementMatrix::identity(6).unwrap(), MeasurementMatrix::from_columns(&columns).unwrap()] {
        for s in 1..=a.cols().min(a.rows()) {
            let d = rip_delta_exact(&a, s).map_err(|e| e.to_string())?;
            check(d.abs() <= 1e-12, || format!("orthonormal δ_{s} = {d}"))?;
        }
    }
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let a = MeasurementMatrix::from_columns(&[vec![1.0, 0.0], vec![0.0, 1.0], vec![h, h]]).unwrap();
    let d2 = rip_delta_exact(&a, 2).map_err(|e| e.to_string())?;
    check((d2 - h).abs() <= 1e-10, || format!("2×3 δ₂ = {d2}"))?;
    for seed in 0..30u64 {
        let a = gen_gaussian(4, 7, 8000 + seed).unwrap();
        for s in 1..=4 {
            let exact = rip_delta_exact(&a, s).map_err(|e| e.to_string())?;
            let mc = rip_delta_mc(&a, s, 25, seed).map_err(|e| e.to_string())?;
            check(mc.delta_lower <= exact + 1e-12, || format!("seed {seed} S={s}: MC {} > exact {exact}", mc.delta_lower))?;
        }
        let profile = rip_profile(&a, 4, 25, seed).map_err(|e| e.to_string())?;
        check(profile.windows(2).all(|w| w[1].delta_lower >= w[0].delta_lower), || {
            format!("seed {seed}: profile decreases")
        })?;
    }
    Ok(format!("2×3 δ₂ − 1/√2 = {:.1e}", d2 - h))
}

fn seeded_outputs() -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    for (name, a) in [
        ("gaussian", gen_gaussian(12, 30, 7).unwrap()),
        ("sphere", gen_uniform_sphere(12, 30, 7).unwrap()),
    ] {
        let mut buf = Vec::new();
        write_matrix_binary(&mut buf, &a).unwrap();
        out.push((name.to_string(), buf));
    }
    let a = gen_gaussian(12, 30, 7).unwrap();
    let json = |v: &dyn erased::Ser| v.bytes();
    let x = gen_sparse_signal(30, 3, 5).unwrap();
    let b = a.mul_vec(&x);
    let fast = SolveOptions { max_inner: 10, ..SolveOptions::with_p(0.5) };
    out.push(("signals".into(), json(&(x.clone(), gen_mixed_signal(30, 3, 0.4, 5).unwrap().x))));
    out.push(("rip".into(), json(&rip_profile(&a, 8, 100, 3).unwrap())));
    out.push(("decode".into(), json(&decode_lp(&a, &b, &fast).unwrap())));
    out.push(("irls".into(), json(&decode_irls(&a, &b, &fast).unwrap())));
    out.push(("lp_eps".into(), json(&decode_lp_eps(&a, &b, 0.1, &fast).unwrap())));
    out.push(("lq".into(), json(&lq_empirical(&a, 0.7, 6, 3, &fast).unwrap())));
    out.push(("d1".into(), json(&d1_gap_check(&a, 0.7, 6, 3, &fast).unwrap())));

    let dir = tempfile::tempdir().unwrap();
    let mut f2 = Fig2Config::preset(Preset::Desk, 11);
    (f2.m, f2.n, f2.s_axis, f2.p_axis, f2.trials, f2.rip_trials) = (12, 30, vec![1, 3, 5], vec![0.5, 1.0], 3, 30);
    let mut f3 = Fig3Config::preset(Preset::Desk, 11);
    (f3.m, f3.n, f3.s, f3.lambda_axis, f3.trials) = (12, 30, 2, vec![0.0, 0.5], 2);
    let mut f4 = Fig4Config::preset(Preset::Desk, 11);
    (f4.m, f4.n, f4.q_list, f4.p_list, f4.num_matrices) = (12, 30, vec![0.5], vec![0.5, 1.0], 2);
    write_fig1(dir.path(), &Fig1Config::preset(Preset::Desk)).unwrap();
    write_fig2(dir.path(), &f2).unwrap();
    write_fig3(dir.path(), &f3).unwrap();
    write_fig4(dir.path(), &f4).unwrap();
    let mut names: Vec<_> = std::fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    for name in names {
        out.push((name.to_string_lossy().into_owned(), std::fs::read(dir.path().join(&name)).unwrap()));
    }
    out
}

mod erased {
    pub trait Ser {
        fn bytes(&self) -> Vec<u8>;
    }
    impl<T: serde::Serialize> Ser for T {
        fn bytes(&self) -> Vec<u8> {
            serde_json::to_vec(self).unwrap()
        }
    }
}

fn determinism() -> Outcome {
    let in_pool = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(seeded_outputs)
    };
    let first = in_pool(1);
    let second = in_pool(1);
    let threaded = in_pool(4);
    for ((name, a), ((_, b), (_, c))) in first.iter().zip(second.iter().zip(&threaded)) {
        check(a == b, || format!("{name} differs between identical runs"))?;
        check(a == c, || format!("{name} differs between 1 and 4 threads"))?;
    }
    check(first.len() == second.len() && first.len() == threaded.len(), || "output sets differ".into())?;
    Ok(format!("{} outputs identical across reruns and thread counts", first.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("constants regression", constants_regression),
        ("threshold identities", threshold_identities),
        ("formula consistency", formula_consistency),
        ("oracle equivalence", oracle_equivalence),
        ("convex cross-check", convex_cross_check),
        ("robustness linearity", robustness_linearity),
        ("phase-diagram ordering", phase_ordering),
        ("SNR trend", snr_trend),
        ("appendix properties", appendix_properties),
        ("RIP correctness", rip_correctness),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            Err(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name} [{secs:.1}s] {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name} [{secs:.1}s] {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
