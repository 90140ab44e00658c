//! Nodal errors, matrix statistics and field reconstruction inside
//! floating subdomains.

#[allow(unused_imports)] // unused when std is in the crate graph
use num_traits::Float as _;

use alloc::format;
use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use rand_core::SeedableRng;
use rand_distr::{Distribution, StandardNormal};

use crate::cover::Cover;
use crate::geometry::{Point, RectDomain};
use crate::linalg::{norm2, Lu};
use crate::problem::EllipticProblem;
use crate::sparse::CsrMatrix;
use crate::spectral::{LocalSolver, SpectralGrid};
use crate::{Error, Result};

/// Largest system for which `matrix_stats` computes a condition number.
pub const CONDITION_LIMIT: usize = 4000;

#[derive(Clone, Debug, PartialEq)]
pub struct KnotErrors {
    /// `u_i - u_exact(x_i)`.
    pub errors: Vec<f64>,
    pub rms: f64,
    pub max: f64,
}

/// `None` when the problem has no exact solution.
pub fn knot_errors(u: &[f64], problem: &EllipticProblem, positions: &[Point]) -> Option<KnotErrors> {
    let errors: Vec<f64> = u
        .iter()
        .zip(positions)
        .map(|(ui, &p)| problem.exact(p).map(|e| ui - e))
        .collect::<Option<_>>()?;
    let n = errors.len().max(1) as f64;
    let rms = (errors.iter().map(|e| e * e).sum::<f64>() / n).sqrt();
    let max = errors.iter().fold(0.0f64, |m, e| m.max(e.abs()));
    Some(KnotErrors { errors, rms, max })
}

/// Mean `|e|` over knots within `r` of the boundary and over knots farther
/// than `3 r`. Either mean is `None` when its set is empty.
pub fn boundary_error_profile(
    errors: &[f64],
    positions: &[Point],
    domain: &RectDomain,
    r: f64,
) -> (Option<f64>, Option<f64>) {
    let (mut near, mut nn, mut far, mut nf) = (0.0, 0usize, 0.0, 0usize);
    for (e, &p) in errors.iter().zip(positions) {
        let d = domain.boundary_distance(p);
        if d <= r {
            near += e.abs();
            nn += 1;
        } else if d > 3.0 * r {
            far += e.abs();
            nf += 1;
        }
    }
    let mean = |s: f64, k: usize| (k > 0).then(|| s / k as f64);
    (mean(near, nn), mean(far, nf))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StatsConfig {
    pub power_iters: usize,
    pub tol: f64,
    pub seed: u64,
    /// Compute `kappa_2(C)` when `N <= CONDITION_LIMIT`.
    pub condition: bool,
}

impl Default for StatsConfig {
    fn default() -> Self {
        Self { power_iters: 200, tol: 1e-6, seed: 0x5eed, condition: true }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MatrixStats {
    pub n: usize,
    pub nnz: usize,
    /// `100 nnz / N^2`.
    pub sparsity_percent: f64,
    /// Largest off-diagonal entry; `None` for a diagonal matrix.
    pub max_off_diagonal: Option<f64>,
    /// Dominant eigenvalue magnitude of `C - I`.
    pub spectral_radius: f64,
    /// False when power iteration stopped on the iteration cap or the
    /// iterate collapsed to zero; the estimate is then approximate.
    pub spectral_radius_converged: bool,
    pub power_iterations: usize,
    pub condition: Option<f64>,
}

pub fn matrix_stats(c: &CsrMatrix, cfg: &StatsConfig) -> Result<MatrixStats> {
    let n = c.nrows();
    if n == 0 || c.ncols() != n {
        return Err(Error::Config(format!("matrix_stats: matrix is {}x{}", n, c.ncols())));
    }
    let max_off_diagonal = c.iter().filter(|(i, j, _)| i != j).map(|(_, _, v)| v).reduce(f64::max);

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut x: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
    let nx = norm2(&x);
    x.iter_mut().for_each(|v| *v /= nx);
    let mut est = 0.0f64;
    let mut converged = false;
    let mut iters = 0;
    while iters < cfg.power_iters {
        iters += 1;
        let mut y = c.mul_vec(&x);
        for (yi, xi) in y.iter_mut().zip(&x) {
            *yi -= xi;
        }
        let ny = norm2(&y);
        if !(ny > 0.0) {
            est = 0.0;
            break;
        }
        let change = (ny - est).abs();
        est = ny;
        y.iter_mut().for_each(|v| *v /= ny);
        x = y;
        if change <= cfg.tol * ny {
            converged = true;
            break;
        }
    }

    let condition = if cfg.condition && n <= CONDITION_LIMIT {
        Some(condition_number(c, cfg.power_iters.max(50))?)
    } else {
        None
    };
    Ok(MatrixStats {
        n,
        nnz: c.nnz(),
        sparsity_percent: 100.0 * c.nnz() as f64 / (n as f64 * n as f64),
        max_off_diagonal,
        spectral_radius: est,
        spectral_radius_converged: converged,
        power_iterations: iters,
        condition,
    })
}

/// `sigma_max / sigma_min` by power iteration on `C^T C` and inverse
/// iteration through a dense LU.
fn condition_number(c: &CsrMatrix, iters: usize) -> Result<f64> {
    let n = c.nrows();
    let ct = CsrMatrix::from_triplets(n, n, &c.iter().map(|(i, j, v)| (j, i, v)).collect::<Vec<_>>())?;
    let lu = Lu::factor(c.to_dense()).map_err(|e| Error::Solver(format!("condition number: {e}")))?;
    let start: Vec<f64> = (0..n).map(|i| 1.0 + 0.5 * ((i * 7919) % 101) as f64 / 101.0).collect();
    let power = |apply: &dyn Fn(&[f64]) -> (f64, Vec<f64>)| {
        let mut x = start.clone();
        let mut s = 0.0f64;
        for _ in 0..iters {
            let nx = norm2(&x);
            x.iter_mut().for_each(|v| *v /= nx);
            let (est, z) = apply(&x);
            let done = (est - s).abs() <= 1e-12 * est;
            s = est;
            x = z;
            if done {
                break;
            }
        }
        s
    };
    let smax = power(&|x| {
        let y = c.mul_vec(x);
        (norm2(&y), ct.mul_vec(&y))
    });
    let inv = power(&|x| {
        let y = lu.solve_transpose(x);
        (norm2(&y), lu.solve(&y))
    });
    Ok(smax * inv)
}

/// Solve the local problem on floating subdomain `sid` with Dirichlet data
/// taken from the interfacial solution `u_hat`, then evaluate at `points`
/// (each inside the disc).
pub fn reconstruct_field(
    cover: &Cover,
    problem: &EllipticProblem,
    u_hat: &[f64],
    sid: usize,
    n_r: usize,
    points: &[Point],
) -> Result<Vec<f64>> {
    let sd = cover
        .subdomains
        .get(sid)
        .ok_or_else(|| Error::Config(format!("reconstruct_field: no subdomain {sid}")))?;
    if !sd.is_floating() {
        return Err(Error::Config(format!(
            "reconstruct_field: subdomain {sid} touches the boundary; only floating subdomains are supported"
        )));
    }
    if u_hat.len() != cover.n_knots() {
        return Err(Error::Config(format!("reconstruct_field: {} values for {} knots", u_hat.len(), cover.n_knots())));
    }
    let grid = SpectralGrid::for_subdomain(sd, sd.stencil_len(), n_r)?;
    let solver = LocalSolver::new(&grid, &grid.sample_coeffs(problem)?)?;
    let boundary: Vec<f64> = sd.stencil().map(|k| u_hat[k]).collect();
    let f = grid.sample(|p| problem.f.eval(p));
    let field = solver.solve_dirichlet(&grid, &f, &boundary);
    points.iter().map(|&p| grid.eval_field(&field, p)).collect()
}
