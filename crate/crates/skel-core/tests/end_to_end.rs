use skel_core::assembly::{assemble_system, AssemblyMode, RowKind, SpectralConfig};
use skel_core::cover::Cover;
use skel_core::diagnostics::{knot_errors, matrix_stats, StatsConfig};
use skel_core::feynmankac::McConfig;
use skel_core::interp::InterpolantSet;
use skel_core::krylov::{build_ras, dense_solve, gmres, partition_graph, GmresConfig};
use skel_core::problem::builtin_problem;
use skel_core::runner::Sequential;
use skel_core::{Point, RectDomain};

fn solve_small(name: &str, mode: AssemblyMode, trajectories: usize) -> (f64, usize, Vec<f64>, Vec<f64>) {
    let cover = Cover::build(RectDomain::square(25.0).unwrap(), 5, 0.9, 20).unwrap();
    let interps = InterpolantSet::build(&cover, 1.5).unwrap();
    let problem = builtin_problem(name).unwrap();
    let mc = McConfig { trajectories, h: 0.02, seed: 11, ..McConfig::default() };
    let sys = assemble_system(&cover, &problem, &interps, &SpectralConfig { n_r: 14 }, &mc, mode, &Sequential).unwrap();
    let coords: Vec<Point> = cover.knots.iter().map(|k| k.position).collect();
    let ras = build_ras(&sys.matrix, partition_graph(&sys.matrix, &coords, 4).unwrap(), &Sequential).unwrap();
    let rep = gmres(&sys.matrix, Some(&ras), &sys.rhs, GmresConfig::default(), &Sequential).unwrap();
    assert!(rep.converged);
    let dense = dense_solve(&sys.matrix, &sys.rhs).unwrap();
    let err = knot_errors(&rep.solution, &problem, &coords).unwrap();
    for (k, kind) in sys.provenance.iter().enumerate() {
        assert_eq!(*kind == RowKind::BoundaryIdentity, cover.knots[k].on_boundary);
    }
    (err.rms, rep.iterations, rep.solution, dense)
}

#[test]
fn constant_problem_is_reproduced() {
    let (rms, _, u, dense) = solve_small("constant", AssemblyMode::Standard, 300);
    assert!(rms <= 1e-3, "rms {rms}");
    for (a, b) in u.iter().zip(&dense) {
        assert!((a - b).abs() <= 1e-8);
    }
}

#[test]
fn harmonic_problem_error_is_monte_carlo_sized() {
    let (rms, iters, _, _) = solve_small("harmonic_xy", AssemblyMode::Standard, 400);
    // |u| reaches 625 on this domain; MC noise dominates the error
    assert!(rms <= 5.0, "rms {rms}");
    assert!(iters <= 40);
}

#[test]
fn averaged_mode_solves_the_same_problem() {
    let (std_rms, _, _, _) = solve_small("constant", AssemblyMode::Standard, 200);
    let (avg_rms, _, _, _) = solve_small("constant", AssemblyMode::Averaged, 200);
    assert!(std_rms <= 1e-3 && avg_rms <= 1e-3, "{std_rms} {avg_rms}");
}

#[test]
fn reference_grid_matrix_statistics_without_monte_carlo_noise() {
    // the structural statistics do not depend on the trajectory count
    let cover = Cover::build(RectDomain::square(50.0).unwrap(), 10, 0.9, 44).unwrap();
    let interps = InterpolantSet::build(&cover, 1.5).unwrap();
    let problem = builtin_problem("harmonic_xy").unwrap();
    let mc = McConfig { trajectories: 20, h: 0.05, ..McConfig::default() };
    let sys = assemble_system(&cover, &problem, &interps, &SpectralConfig::default(), &mc, AssemblyMode::Standard, &Sequential).unwrap();
    let s = matrix_stats(&sys.matrix, &StatsConfig { condition: false, ..StatsConfig::default() }).unwrap();
    assert!((3000..=4600).contains(&s.n));
    assert!((1.0..=4.0).contains(&s.sparsity_percent), "{}", s.sparsity_percent);
    assert_eq!(sys.factorizations, 1);
    for (i, kind) in sys.provenance.iter().enumerate() {
        if *kind == RowKind::Spectral {
            assert!(sys.matrix.row(i).1.iter().sum::<f64>().abs() <= 1e-8);
        }
    }
}
