//! Cover, assembly, solve, diagnostics, artifacts.

use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use serde_json::{json, Value};
use skel_core::assembly::{assemble_system, RowKind, SkeletalSystem, SpectralConfig};
use skel_core::cover::Cover;
use skel_core::diagnostics::{knot_errors, matrix_stats, KnotErrors, MatrixStats, StatsConfig};
use skel_core::feynmankac::McConfig;
use skel_core::interp::InterpolantSet;
use skel_core::krylov::{build_ras, gmres, partition_graph, GmresConfig, SolveReport};
use skel_core::runner::{Sequential, TaskRunner};
use skel_core::{Point, RectDomain};

use crate::config::RunConfig;
use crate::io::{write_csv, write_json, write_matrix_market, write_vector};
use crate::{RayonRunner, Result, SkelError, Stage};

pub struct RunOutput {
    pub config: RunConfig,
    pub problem: String,
    pub cover: Cover,
    pub system: SkeletalSystem,
    pub report: SolveReport,
    pub parts: usize,
    pub errors: Option<KnotErrors>,
    pub stats: MatrixStats,
    /// Wall-clock seconds per phase, in execution order.
    pub timings: Vec<(&'static str, f64)>,
}

/// Run with `cfg.workers` threads and write artifacts when `output_dir` is
/// set.
pub fn run(cfg: &RunConfig) -> Result<RunOutput> {
    let out = if cfg.workers <= 1 {
        solve(cfg, &Sequential)?
    } else {
        solve(cfg, &RayonRunner::new(cfg.workers)?)?
    };
    if let Some(dir) = &cfg.output_dir {
        write_artifacts(&out, dir)?;
    }
    Ok(out)
}

pub fn solve<R: TaskRunner>(cfg: &RunConfig, runner: &R) -> Result<RunOutput> {
    cfg.validate()?;
    let problem = cfg.problem.build()?;
    let mut timings = Vec::new();
    let mut clock = Instant::now();
    let mut lap = |name: &'static str, timings: &mut Vec<(&'static str, f64)>| {
        timings.push((name, clock.elapsed().as_secs_f64()));
        clock = Instant::now();
    };

    let [x0, x1, y0, y1] = cfg.domain;
    let domain = RectDomain::new(x0, x1, y0, y1).stage("cover")?;
    let cover = Cover::build(domain, cfg.m_per_side, cfg.rho, cfg.n_per_circle).stage("cover")?;
    let interps = InterpolantSet::build(&cover, cfg.c2).stage("interp")?;
    lap("cover", &mut timings);

    let mc = McConfig { trajectories: cfg.trajectories, h: cfg.h, seed: cfg.seed, c0: cfg.c0, max_steps: None };
    let spectral = SpectralConfig { n_r: cfg.n_r };
    let system = assemble_system(&cover, &problem, &interps, &spectral, &mc, cfg.mode.into(), runner).stage("assembly")?;
    lap("assembly", &mut timings);

    let coords: Vec<Point> = cover.knots.iter().map(|k| k.position).collect();
    let partition = partition_graph(&system.matrix, &coords, cfg.parts).stage("krylov")?;
    let ras = build_ras(&system.matrix, partition, runner).stage("krylov")?;
    let parts = ras.parts();
    lap("preconditioner", &mut timings);
    let report = gmres(
        &system.matrix,
        Some(&ras),
        &system.rhs,
        GmresConfig { tol: cfg.gmres_tol, max_iter: cfg.gmres_max_iter },
        runner,
    )
    .stage("krylov")?;
    lap("gmres", &mut timings);

    let errors = knot_errors(&report.solution, &problem, &coords);
    let stats = matrix_stats(&system.matrix, &StatsConfig { seed: cfg.seed, ..StatsConfig::default() }).stage("diagnostics")?;
    lap("diagnostics", &mut timings);

    Ok(RunOutput { config: cfg.clone(), problem: problem.name, cover, system, report, parts, errors, stats, timings })
}

impl RunOutput {
    pub fn row_counts(&self) -> [usize; 3] {
        let mut c = [0; 3];
        for k in &self.system.provenance {
            c[match k {
                RowKind::Spectral => 0,
                RowKind::MonteCarlo => 1,
                RowKind::BoundaryIdentity => 2,
            }] += 1;
        }
        c
    }

    /// Mean and max of the per-row standard error of the Monte Carlo
    /// right-hand side.
    pub fn mc_rhs_stderr(&self) -> (Option<f64>, Option<f64>) {
        let s: Vec<f64> = self.system.mc_stats.iter().flatten().map(|m| m.rhs_stderr).collect();
        if s.is_empty() {
            return (None, None);
        }
        (Some(s.iter().sum::<f64>() / s.len() as f64), s.iter().copied().reduce(f64::max))
    }

    pub fn stats_json(&self) -> Value {
        let [spectral, mc, boundary] = self.row_counts();
        let (se_mean, se_max) = self.mc_rhs_stderr();
        let timings: serde_json::Map<String, Value> =
            self.timings.iter().map(|(k, v)| (k.to_string(), json!(v))).collect();
        json!({
            "problem": self.problem,
            "n": self.stats.n,
            "nnz": self.stats.nnz,
            "sparsity_percent": self.stats.sparsity_percent,
            "max_off_diagonal": self.stats.max_off_diagonal,
            "spectral_radius_c_minus_i": self.stats.spectral_radius,
            "spectral_radius_converged": self.stats.spectral_radius_converged,
            "power_iterations": self.stats.power_iterations,
            "condition_number": self.stats.condition,
            "rms_error": self.errors.as_ref().map(|e| e.rms),
            "max_error": self.errors.as_ref().map(|e| e.max),
            "gmres_iterations": self.report.iterations,
            "gmres_converged": self.report.converged,
            "gmres_final_residual": self.report.final_residual(),
            "gmres_true_residual": self.report.true_residual,
            "preconditioner_parts": self.parts,
            "subdomains": self.cover.subdomains.len(),
            "floating_subdomains": self.cover.floating_count(),
            "spectral_factorizations": self.system.factorizations,
            "rows": {"spectral": spectral, "monte_carlo": mc, "boundary_identity": boundary},
            "mc_rhs_stderr_mean": se_mean,
            "mc_rhs_stderr_max": se_max,
            "timings_s": timings,
            "config": self.config,
        })
    }

    pub fn summary(&self) -> String {
        let mut s = String::new();
        let [spectral, mc, boundary] = self.row_counts();
        let _ = writeln!(s, "problem            {}", self.problem);
        let _ = writeln!(
            s,
            "cover              {} subdomains ({} floating), {} knots",
            self.cover.subdomains.len(),
            self.cover.floating_count(),
            self.cover.n_knots()
        );
        let _ = writeln!(s, "rows               {spectral} spectral, {mc} monte carlo, {boundary} boundary");
        let _ = writeln!(s, "sparsity           {:.3} %", self.stats.sparsity_percent);
        if let Some(m) = self.stats.max_off_diagonal {
            let _ = writeln!(s, "max C_ij (i != j)  {m:.4}");
        }
        let _ = writeln!(
            s,
            "rho(C - I)         {:.4}{}",
            self.stats.spectral_radius,
            if self.stats.spectral_radius_converged { "" } else { " (approximate)" }
        );
        if let Some(k) = self.stats.condition {
            let _ = writeln!(s, "cond_2(C)          {k:.3e}");
        }
        let _ = writeln!(
            s,
            "gmres              {} iterations, P = {}, residual {:.2e}{}",
            self.report.iterations,
            self.parts,
            self.report.final_residual(),
            if self.report.converged { "" } else { " (NOT CONVERGED)" }
        );
        match &self.errors {
            Some(e) => {
                let _ = writeln!(s, "knot error         rms {:.3e}, max {:.3e}", e.rms, e.max);
            }
            None => {
                let _ = writeln!(s, "knot error         skipped: problem has no exact solution");
            }
        }
        let t: Vec<String> = self.timings.iter().map(|(k, v)| format!("{k} {v:.2}s")).collect();
        let _ = writeln!(s, "time               {}", t.join(", "));
        s
    }
}

pub fn write_artifacts(out: &RunOutput, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|source| SkelError::Io { path: dir.into(), source })?;
    write_matrix_market(&dir.join("system.mtx"), &out.system.matrix)?;
    write_vector(&dir.join("rhs.txt"), &out.system.rhs)?;
    write_vector(&dir.join("solution.txt"), &out.report.solution)?;
    let prov = |i: usize| out.system.provenance[i].as_str();
    write_csv(
        &dir.join("knots.csv"),
        &["id", "x", "y", "on_boundary", "host", "owner", "provenance"],
        out.cover.knots.iter().map(|k| {
            vec![
                k.id.to_string(),
                format!("{:.16e}", k.position.x),
                format!("{:.16e}", k.position.y),
                k.on_boundary.to_string(),
                k.host.subdomain.to_string(),
                k.owner.map(|o| o.to_string()).unwrap_or_default(),
                prov(k.id).to_string(),
            ]
        }),
    )?;
    if let Some(e) = &out.errors {
        write_csv(
            &dir.join("errors.csv"),
            &["id", "x", "y", "error", "provenance"],
            out.cover.knots.iter().zip(&e.errors).map(|(k, err)| {
                vec![
                    k.id.to_string(),
                    format!("{:.16e}", k.position.x),
                    format!("{:.16e}", k.position.y),
                    format!("{err:.16e}"),
                    prov(k.id).to_string(),
                ]
            }),
        )?;
    }
    write_csv(
        &dir.join("residuals.csv"),
        &["iteration", "relative_residual"],
        out.report.residual_history.iter().enumerate().map(|(i, r)| vec![i.to_string(), format!("{r:.16e}")]),
    )?;
    write_json(&dir.join("stats.json"), &out.stats_json())
}
