use proptest::prelude::*;

use skel_core::cover::Cover;
use skel_core::diagnostics::knot_errors;
use skel_core::feynmankac::{integrate_trajectory, trajectory_seed, ExitRegion};
use skel_core::geometry::wrap_angle;
use skel_core::interp::{fourier_cardinal, FourierBasis};
use skel_core::krylov::{build_ras, gmres, partition_graph, GmresConfig};
use skel_core::problem::{builtin_problem, cholesky2};
use skel_core::runner::Sequential;
use skel_core::sparse::CsrMatrix;
use skel_core::{Point, RectDomain};

fn grid_matrix(k: usize, skew: f64) -> (CsrMatrix, Vec<Point>) {
    let mut t = Vec::new();
    let mut pts = Vec::new();
    for iy in 0..k {
        for ix in 0..k {
            let i = iy * k + ix;
            pts.push(Point::new(ix as f64, iy as f64));
            t.push((i, i, 4.0 + skew.abs()));
            if ix > 0 {
                t.push((i, i - 1, -1.0 - skew));
            }
            if ix + 1 < k {
                t.push((i, i + 1, -1.0 + skew));
            }
            if iy > 0 {
                t.push((i, i - k, -1.0));
            }
            if iy + 1 < k {
                t.push((i, i + k, -1.0));
            }
        }
    }
    (CsrMatrix::from_triplets(k * k, k * k, &t).unwrap(), pts)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn fourier_partition_of_unity(half in 1usize..80, theta0 in -4.0f64..4.0, theta in -20.0f64..20.0) {
        let n = 2 * half;
        let b = FourierBasis::new(n, theta0).unwrap();
        let mut h = vec![0.0; n];
        b.cardinals_into(theta, &mut h);
        prop_assert!((h.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn fourier_fast_path_matches_direct_sum(half in 1usize..32, j in 0usize..64, theta in -7.0f64..7.0) {
        let n = 2 * half;
        let j = j % n;
        let b = FourierBasis::new(n, 0.0).unwrap();
        prop_assert!((b.cardinal(j, theta) - fourier_cardinal(n, j, theta)).abs() <= 1e-11);
    }

    #[test]
    fn diffusion_factor_reproduces_matrix(l00 in 0.1f64..5.0, l10 in -3.0f64..3.0, l11 in 0.1f64..5.0) {
        let a = [l00 * l00, l10 * l00, l10 * l10 + l11 * l11];
        let s = cholesky2(a).unwrap();
        let back = [s[0][0] * s[0][0], s[1][0] * s[0][0], s[1][0] * s[1][0] + s[1][1] * s[1][1]];
        for k in 0..3 {
            prop_assert!((back[k] - a[k]).abs() <= 1e-12 * (1.0 + a[k].abs()));
        }
        prop_assert!(cholesky2([a[0], a[1], a[1] * a[1] / a[0] - 1e-3]).is_none());
    }

    #[test]
    fn wrapped_angles_stay_in_range(theta in -1e4f64..1e4) {
        let w = wrap_angle(theta);
        prop_assert!((0.0..std::f64::consts::TAU).contains(&w));
        let turns = (theta - w) / std::f64::consts::TAU;
        prop_assert!((turns - turns.round()).abs() <= 1e-9);
    }

    #[test]
    fn trajectories_are_reproducible(seed in any::<u64>(), knot in 0u64..10_000, t in 0u64..10_000) {
        let p = builtin_problem("paper46").unwrap();
        let region = ExitRegion::disc(Point::new(0.0, 0.0), 2.0);
        let s = trajectory_seed(seed, knot, t);
        prop_assert_eq!(s, trajectory_seed(seed, knot, t));
        let a = integrate_trajectory(&p, &region, Point::new(0.3, -0.2), 0.01, 0.5826, 1_000_000, s).unwrap();
        let b = integrate_trajectory(&p, &region, Point::new(0.3, -0.2), 0.01, 0.5826, 1_000_000, s).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn ras_partition_of_unity_is_exact(k in 3usize..14, p in 1usize..20, skew in -0.5f64..0.5) {
        let (c, pts) = grid_matrix(k, skew);
        let p = p.min(k * k);
        let part = partition_graph(&c, &pts, p).unwrap();
        let mut cores: Vec<usize> = part.cores.concat();
        cores.sort_unstable();
        prop_assert_eq!(cores, (0..k * k).collect::<Vec<_>>());
        for (core, ext) in part.cores.iter().zip(&part.parts) {
            prop_assert!(core.iter().all(|i| ext.binary_search(i).is_ok()));
        }
        let ras = build_ras(&c, part, &Sequential).unwrap();
        prop_assert_eq!(ras.partition_of_unity_defect(), 0.0);
    }

    #[test]
    fn gmres_history_is_monotone(k in 3usize..12, p in 1usize..9, skew in -0.6f64..0.6, rseed in 0u64..1000) {
        let (c, pts) = grid_matrix(k, skew);
        let ras = build_ras(&c, partition_graph(&c, &pts, p.min(k * k)).unwrap(), &Sequential).unwrap();
        let r: Vec<f64> = (0..k * k).map(|i| ((i as u64 * 2654435761 + rseed) % 1000) as f64 / 500.0 - 1.0).collect();
        prop_assume!(r.iter().any(|&v| v != 0.0));
        let rep = gmres(&c, Some(&ras), &r, GmresConfig::default(), &Sequential).unwrap();
        prop_assert!(rep.converged);
        prop_assert!(rep.residual_history.windows(2).all(|w| w[1] <= w[0]));
        prop_assert!(rep.true_residual <= 1e-8);
    }

    #[test]
    fn sparse_product_matches_dense(entries in proptest::collection::vec((0usize..7, 0usize..5, -10.0f64..10.0), 0..40),
                                    x in proptest::collection::vec(-5.0f64..5.0, 5)) {
        let c = CsrMatrix::from_triplets(7, 5, &entries).unwrap();
        let dense = c.to_dense();
        let y = c.mul_vec(&x);
        let yd = dense.mul_vec(&x);
        for (a, b) in y.iter().zip(&yd) {
            prop_assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()));
        }
    }

    #[test]
    fn knot_rms_never_exceeds_max(v in proptest::collection::vec(-2.0f64..2.0, 1..60)) {
        let p = builtin_problem("constant").unwrap();
        let pts: Vec<Point> = (0..v.len()).map(|i| Point::new(i as f64, 0.0)).collect();
        let u: Vec<f64> = v.iter().map(|e| 1.0 + e).collect();
        let e = knot_errors(&u, &p, &pts).unwrap();
        prop_assert!(e.rms <= e.max + 1e-15);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn covers_are_valid(m in 2usize..6, rho in 0.72f64..0.98, w in 10.0f64..40.0, aspect in 0.8f64..1.25) {
        let domain = RectDomain::new(-w, w, -w * aspect, w * aspect).unwrap();
        let cover = Cover::build(domain, m, rho, 16).unwrap();
        let report = cover.validate(25);
        prop_assert!(report.is_pass(), "{:?}", report.first_violation);
        for k in &cover.knots {
            prop_assert_eq!(k.on_boundary, k.owner.is_none());
            if let Some(o) = k.owner {
                prop_assert!(o != k.host.subdomain);
                prop_assert!(k.owner_depth > 0.0);
            }
        }
        prop_assert_eq!(cover.floating_count(), (m - 2) * (m - 2));
    }
}
