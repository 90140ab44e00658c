//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs every criterion at full scale (the reference-grid runs take tens of
//! minutes on one core) and exits nonzero if any criterion fails.

use std::io::Write as _;
use std::path::Path;
use std::time::Instant;

use serde_json::Value;
use skel::config::RunConfig;
use skel::{run, RunOutput};
use skel_core::cover::Cover;
use skel_core::diagnostics::boundary_error_profile;
use skel_core::feynmankac::{estimate_row, mean_exit_functional, ExitRegion, McConfig};
use skel_core::interp::{FourierBasis, InterfaceInterpolant, InterpolantSet};
use skel_core::krylov::{build_ras, dense_solve, gmres, partition_graph, GmresConfig};
use skel_core::linalg::{dot, norm2};
use skel_core::problem::builtin_problem;
use skel_core::runner::Sequential;
use skel_core::spectral::{LocalSolver, SpectralGrid};
use skel_core::{Point, RectDomain};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn reference_cover() -> Cover {
    Cover::build(RectDomain::square(50.0).unwrap(), 10, 0.9, 44).unwrap()
}

fn reference_config(dir: &Path) -> RunConfig {
    RunConfig { output_dir: Some(dir.to_path_buf()), ..RunConfig::default() }
}

fn criterion_1() -> Outcome {
    let cover = reference_cover();
    let sd = cover.subdomains.iter().find(|s| s.is_floating()).unwrap();
    let p = builtin_problem("paper46").unwrap();
    let grid = SpectralGrid::new(sd.center, 9.0, 44, 22).unwrap();
    let solver = LocalSolver::new(&grid, &grid.sample_coeffs(&p).unwrap()).unwrap();
    let exact = grid.sample(|q| p.exact(q).unwrap());
    let f = grid.sample(|q| p.f.eval(q));
    let u = solver.solve_dirichlet(&grid, &f, &exact[..grid.n_theta()]);
    let err = u.iter().zip(&exact).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let kappa = solver.condition_estimate(300);
    outcome(
        err <= 1e-10 && (1e4..=1e7).contains(&kappa),
        format!("max interior error {err:.2e} (<= 1e-10), condition {kappa:.2e} (in [1e4, 1e7])"),
    )
}

fn criterion_2() -> Outcome {
    let mut fourier_worst: f64 = 0.0;
    for n in [8, 44, 128] {
        let b = FourierBasis::new(n, 0.3).unwrap();
        let mut h = vec![0.0; n];
        for k in 0..n {
            b.cardinals_into(b.node(k), &mut h);
            for (j, v) in h.iter().enumerate() {
                fourier_worst = fourier_worst.max((v - if j == k { 1.0 } else { 0.0 }).abs());
            }
        }
        for s in 0..2000 {
            let theta = -7.0 + 14.0 * s as f64 / 1999.0;
            b.cardinals_into(theta, &mut h);
            fourier_worst = fourier_worst.max((h.iter().sum::<f64>() - 1.0).abs());
        }
    }
    let cover = reference_cover();
    let interps = InterpolantSet::build(&cover, 1.5).unwrap();
    let (mut rbf_worst, mut arcs): (f64, usize) = (0.0, 0);
    for per in &interps.per_subdomain {
        for it in per {
            if let InterfaceInterpolant::Rbf(b) = it {
                arcs += 1;
                for (k, &theta) in b.angles().iter().enumerate() {
                    let h = b.cardinals(theta).unwrap();
                    for (j, v) in h.iter().enumerate() {
                        rbf_worst = rbf_worst.max((v - if j == k { 1.0 } else { 0.0 }).abs());
                    }
                }
            }
        }
    }
    outcome(
        fourier_worst <= 1e-12 && rbf_worst <= 1e-10 && arcs > 0,
        format!("Fourier delta/unity defect {fourier_worst:.1e} (<= 1e-12); RBF delta defect {rbf_worst:.1e} over {arcs} arcs (<= 1e-10)"),
    )
}

fn criterion_3() -> Outcome {
    let p = builtin_problem("disc_exit_time").unwrap();
    let region = ExitRegion::disc(Point::new(0.0, 0.0), 1.0);
    let est = |h: f64| {
        let mc = McConfig { trajectories: 100_000, h, ..McConfig::default() };
        mean_exit_functional(&p, &region, Point::new(0.0, 0.0), &mc, |e| e.z).unwrap()
    };
    let (m1, s1) = est(1e-3);
    let (m2, s2) = est(2.5e-4);
    let first = (m1 - 0.5).abs() <= 3.0 * s1 + 0.01;
    let shrink = (m2 - 0.5).abs() <= (m1 - 0.5).abs() + 2.0 * s1.hypot(s2);
    outcome(
        first && shrink,
        format!("h=1e-3: {m1:.5} +- {s1:.1e}; h=2.5e-4: {m2:.5} +- {s2:.1e} (target 0.5)"),
    )
}

fn criterion_4() -> Outcome {
    let cover = reference_cover();
    let p = builtin_problem("harmonic_xy").unwrap();
    let interps = InterpolantSet::build(&cover, 1.5).unwrap();
    // a floating disc near the middle of the lattice
    let sd = cover
        .subdomains
        .iter()
        .filter(|s| s.is_floating())
        .min_by(|a, b| a.center.norm().partial_cmp(&b.center.norm()).unwrap())
        .unwrap();
    let grid = SpectralGrid::for_subdomain(sd, sd.stencil_len(), 22).unwrap();
    let solver = LocalSolver::new(&grid, &grid.sample_coeffs(&p).unwrap()).unwrap();
    let region = ExitRegion::disc(sd.center, sd.radius);
    let stencil: Vec<Vec<usize>> = sd.arcs.iter().map(|a| a.knots.clone()).collect();
    let owned: Vec<usize> = cover.knots.iter().filter(|k| k.owner == Some(sd.id)).map(|k| k.id).collect();

    let (mut worst_excess, mut worst_sum, mut checked): (f64, f64, usize) = (f64::NEG_INFINITY, 0.0, 0);
    for &kid in &owned {
        let x0 = cover.knots[kid].position;
        let w = grid.eval_weights(x0).unwrap();
        let spectral: Vec<f64> = solver.cardinal_fields().iter().map(|g| dot(&w, g)).collect();
        let mc = McConfig { trajectories: 10_000, h: 1e-3, seed: 0xacce97 ^ kid as u64, ..McConfig::default() };
        let row = estimate_row(&p, &region, &stencil, &interps.per_subdomain[sd.id], kid, x0, &mc, &Sequential).unwrap();
        let cols: Vec<usize> = row.coeffs.iter().map(|c| c.0).collect();
        assert_eq!(cols, sd.stencil().collect::<Vec<_>>());
        for (((_, v), se), s) in row.coeffs.iter().zip(&row.coeff_stderr).zip(&spectral) {
            if *v != 0.0 || *s != 0.0 {
                worst_excess = worst_excess.max((v - s).abs() - (3.0 * se + 0.005));
            }
        }
        worst_sum = worst_sum.max((row.coeffs.iter().map(|c| c.1).sum::<f64>() + 1.0).abs());
        checked += 1;
    }
    // the sum identity at a tiny trajectory count
    let kid = owned[0];
    let mc = McConfig { trajectories: 7, h: 1e-3, ..McConfig::default() };
    let row = estimate_row(&p, &region, &stencil, &interps.per_subdomain[sd.id], kid, cover.knots[kid].position, &mc, &Sequential).unwrap();
    worst_sum = worst_sum.max((row.coeffs.iter().map(|c| c.1).sum::<f64>() + 1.0).abs());
    outcome(
        worst_excess <= 0.0 && worst_sum <= 1e-12 && checked > 0,
        format!(
            "{checked} rows of subdomain {}: max(|mc - spectral| - (3 se + 0.005)) = {worst_excess:.2e} (<= 0); |sum + 1| <= {worst_sum:.1e}",
            sd.id
        ),
    )
}

fn criterion_5(out: &RunOutput) -> Outcome {
    let c = &out.system.matrix;
    let (mut worst, mut rows): (f64, usize) = (0.0, 0);
    for (i, kind) in out.system.provenance.iter().enumerate() {
        if kind.as_str() == "spectral" {
            let (_, v) = c.row(i);
            worst = worst.max(v.iter().sum::<f64>().abs());
            rows += 1;
        }
    }
    outcome(worst <= 1e-8 && rows > 0, format!("max |row sum| over {rows} spectral rows = {worst:.2e} (<= 1e-8)"))
}

fn criterion_6(out: &RunOutput) -> Outcome {
    let s = &out.stats;
    let rms = out.errors.as_ref().unwrap().rms;
    let max_off = s.max_off_diagonal.unwrap_or(f64::NEG_INFINITY);
    let checks = [
        ("N", (3000..=4600).contains(&s.n)),
        ("sparsity", (1.0..=4.0).contains(&s.sparsity_percent)),
        ("rho", (0.90..1.0).contains(&s.spectral_radius)),
        ("max offdiag", max_off <= 0.1),
        ("rms", rms <= 1.5e-4),
        ("gmres", out.report.converged && out.report.iterations <= 60),
    ];
    let failed: Vec<&str> = checks.iter().filter(|c| !c.1).map(|c| c.0).collect();
    outcome(
        failed.is_empty(),
        format!(
            "N {}, sparsity {:.3}%, rho(C-I) {:.4}, max C_ij {:.4}, RMS {:.3e} (<= 1.5e-4), GMRES {} its{}",
            s.n,
            s.sparsity_percent,
            s.spectral_radius,
            max_off,
            rms,
            out.report.iterations,
            if failed.is_empty() { String::new() } else { format!("; failed: {}", failed.join(", ")) }
        ),
    )
}

fn criterion_7() -> Outcome {
    let rms = |h: f64, n: usize| {
        let cfg = RunConfig { h, trajectories: n, ..RunConfig::default() };
        run(&cfg).unwrap().errors.unwrap().rms
    };
    let coarse = rms(0.015, 1000);
    let fine = rms(0.005, 5000);
    outcome(
        fine * 1.5 <= coarse,
        format!("RMS (h=0.015, N=1000) {coarse:.3e}; (h=0.005, N=5000) {fine:.3e}; ratio {:.2} (>= 1.5)", coarse / fine),
    )
}

fn criterion_8(out: &RunOutput) -> Outcome {
    let c = &out.system.matrix;
    let r = &out.system.rhs;
    let dense = dense_solve(c, r).unwrap();
    let diff: Vec<f64> = dense.iter().zip(&out.report.solution).map(|(a, b)| a - b).collect();
    let rel = norm2(&diff) / norm2(&dense);
    let coords: Vec<Point> = out.cover.knots.iter().map(|k| k.position).collect();
    let mut defects = Vec::new();
    let mut p1_iters = usize::MAX;
    for p in [1, 4, 16] {
        let ras = build_ras(c, partition_graph(c, &coords, p).unwrap(), &Sequential).unwrap();
        defects.push(ras.partition_of_unity_defect());
        if p == 1 {
            p1_iters = gmres(c, Some(&ras), r, GmresConfig::default(), &Sequential).unwrap().iterations;
        }
    }
    outcome(
        rel <= 1e-8 && p1_iters <= 2 && defects.iter().all(|&d| d == 0.0),
        format!("GMRES vs dense rel. diff {rel:.2e} (<= 1e-8); P=1 iterations {p1_iters} (<= 2); unity defects {defects:?}"),
    )
}

fn numeric_stats(dir: &Path) -> Value {
    let mut v: Value = serde_json::from_str(&std::fs::read_to_string(dir.join("stats.json")).unwrap()).unwrap();
    let obj = v.as_object_mut().unwrap();
    obj.remove("timings_s");
    if let Some(cfg) = obj.get_mut("config").and_then(Value::as_object_mut) {
        cfg.remove("workers");
        cfg.remove("output_dir");
    }
    v
}

fn criterion_9(first: &Path) -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let cfg = RunConfig { workers: 8, ..reference_config(dir.path()) };
    run(&cfg).unwrap();
    let same_solution = std::fs::read(first.join("solution.txt")).unwrap() == std::fs::read(dir.path().join("solution.txt")).unwrap();
    let same_stats = numeric_stats(first) == numeric_stats(dir.path());
    outcome(
        same_solution && same_stats,
        format!("workers 1 vs 8: solution.txt identical {same_solution}, stats.json numeric fields identical {same_stats}"),
    )
}

fn criterion_10(out: &RunOutput) -> Outcome {
    let e = out.errors.as_ref().unwrap();
    let coords: Vec<Point> = out.cover.knots.iter().map(|k| k.position).collect();
    let (near, far) = boundary_error_profile(&e.errors, &coords, &out.cover.domain, 9.0);
    let (near, far) = (near.unwrap_or(0.0), far.unwrap_or(f64::INFINITY));
    outcome(near > far, format!("mean |error| within 9 of the boundary {near:.3e} vs beyond 27 {far:.3e}"))
}

fn main() {
    // `cargo test -- --list` and similar probes should not start the suite
    if std::env::args().any(|a| a == "--list") {
        return;
    }
    let only: Option<Vec<u32>> = std::env::var("SKEL_ACCEPTANCE_ONLY")
        .ok()
        .map(|s| s.split(',').filter_map(|t| t.trim().parse().ok()).collect());
    let wanted = |k: u32| only.as_ref().is_none_or(|o| o.contains(&k));
    let mut failures = 0;
    let mut report = |k: u32, name: &str, f: &mut dyn FnMut() -> Outcome| {
        if !wanted(k) {
            return;
        }
        let t = Instant::now();
        let o = f();
        println!(
            "criterion {k:>2} {name:<34} {} ({:.0}s) {}",
            if o.pass { "PASS" } else { "FAIL" },
            t.elapsed().as_secs_f64(),
            o.detail
        );
        std::io::stdout().flush().ok();
        if !o.pass {
            failures += 1;
        }
    };

    report(1, "local spectral accuracy", &mut criterion_1);
    report(2, "cardinal invariants", &mut criterion_2);
    report(3, "Monte Carlo exit-time oracle", &mut criterion_3);
    report(4, "MC/spectral row equivalence", &mut criterion_4);

    let needs_reference_run = [5, 6, 8, 9, 10].iter().any(|&k| wanted(k));
    let dir = tempfile::tempdir().unwrap();
    let reference = needs_reference_run.then(|| {
        let t = Instant::now();
        let out = run(&reference_config(dir.path())).unwrap();
        eprintln!("reference-grid run: {:.0}s", t.elapsed().as_secs_f64());
        out
    });
    if let Some(out) = &reference {
        report(5, "floating-row sums", &mut || criterion_5(out));
        report(6, "small-case bands", &mut || criterion_6(out));
    }
    report(7, "convergence trend", &mut criterion_7);
    if let Some(out) = &reference {
        report(8, "solver oracle", &mut || criterion_8(out));
        report(9, "determinism across workers", &mut || criterion_9(dir.path()));
        report(10, "error geography", &mut || criterion_10(out));
    }

    if failures > 0 {
        println!("acceptance: {failures} criterion(s) failed");
        std::process::exit(1);
    }
    println!("acceptance: all selected criteria passed");
}
