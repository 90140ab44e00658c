#[allow(unused_imports)] // unused when std is in the crate graph
use num_traits::Float as _;

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::ras::{apply_ras, RasPreconditioner};
use crate::linalg::{dot, norm2};
use crate::runner::TaskRunner;
use crate::sparse::CsrMatrix;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GmresConfig {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for GmresConfig {
    fn default() -> Self {
        Self { tol: 1e-10, max_iter: 500 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveReport {
    pub solution: Vec<f64>,
    pub iterations: usize,
    /// `||r - C u_k|| / ||r||` as tracked by the Givens recurrence, starting
    /// with 1 for `u_0 = 0`.
    pub residual_history: Vec<f64>,
    pub converged: bool,
    /// Relative residual recomputed from the returned solution.
    pub true_residual: f64,
}

impl SolveReport {
    pub fn final_residual(&self) -> f64 {
        *self.residual_history.last().unwrap_or(&1.0)
    }
}

/// Full GMRES with modified Gram-Schmidt on `C M^{-1} y = r`, `u = M^{-1} y`.
/// Reaching `max_iter` is not an error: the report is returned with
/// `converged = false`.
pub fn gmres(
    c: &CsrMatrix,
    m: Option<&RasPreconditioner>,
    r: &[f64],
    cfg: GmresConfig,
    runner: &impl TaskRunner,
) -> Result<SolveReport> {
    let n = c.nrows();
    if c.ncols() != n || r.len() != n {
        return Err(Error::Solver(format!("gmres: shape {}x{} with rhs {}", n, c.ncols(), r.len())));
    }
    if let Some(m) = m {
        if m.dim() != n {
            return Err(Error::Solver(format!("gmres: preconditioner of size {} for N = {n}", m.dim())));
        }
    }
    if !(cfg.tol > 0.0) || cfg.max_iter == 0 {
        return Err(Error::Config(format!("gmres: tol {} and max_iter {} must be positive", cfg.tol, cfg.max_iter)));
    }
    let beta = norm2(r);
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(Error::Solver(format!("gmres: right-hand side norm {beta}")));
    }
    let precond = |v: &[f64]| match m {
        Some(m) => apply_ras(m, v, runner),
        None => v.to_vec(),
    };

    let max_iter = cfg.max_iter.min(n);
    let mut basis: Vec<Vec<f64>> = vec![r.iter().map(|x| x / beta).collect()];
    // column k of the Hessenberg matrix, already rotated
    let mut hcols: Vec<Vec<f64>> = Vec::new();
    let mut rot: Vec<(f64, f64)> = Vec::new();
    let mut g = vec![beta];
    let mut history = vec![1.0];
    let mut converged = false;

    for k in 0..max_iter {
        let z = precond(&basis[k]);
        let mut w = c.mul_vec(&z);
        let mut h = vec![0.0; k + 2];
        for (j, v) in basis.iter().enumerate() {
            let hj = dot(&w, v);
            for (wi, vi) in w.iter_mut().zip(v) {
                *wi -= hj * vi;
            }
            h[j] = hj;
        }
        let hn = norm2(&w);
        h[k + 1] = hn;

        for (j, &(cs, sn)) in rot.iter().enumerate() {
            let (a, b) = (h[j], h[j + 1]);
            h[j] = cs * a + sn * b;
            h[j + 1] = -sn * a + cs * b;
        }
        let (a, b) = (h[k], h[k + 1]);
        let den = a.hypot(b);
        if !(den > 0.0) {
            return Err(Error::Solver(format!("gmres: singular Krylov step at iteration {}", k + 1)));
        }
        let (cs, sn) = (a / den, b / den);
        h[k] = den;
        h[k + 1] = 0.0;
        rot.push((cs, sn));
        let gk = g[k];
        g[k] = cs * gk;
        g.push(-sn * gk);
        h.truncate(k + 1);
        hcols.push(h);

        let rel = g[k + 1].abs() / beta;
        history.push(rel);
        if rel <= cfg.tol {
            converged = true;
            break;
        }
        if hn <= 1e-14 * beta {
            return Err(Error::Solver(format!(
                "gmres: breakdown at iteration {} with relative residual {rel:e}",
                k + 1
            )));
        }
        basis.push(w.into_iter().map(|x| x / hn).collect());
    }

    let iterations = hcols.len();
    let mut y = g[..iterations].to_vec();
    for i in (0..iterations).rev() {
        for j in i + 1..iterations {
            y[i] -= hcols[j][i] * y[j];
        }
        y[i] /= hcols[i][i];
    }
    let mut x = vec![0.0; n];
    for (v, yj) in basis.iter().zip(&y) {
        for (xi, vi) in x.iter_mut().zip(v) {
            *xi += yj * vi;
        }
    }
    let solution = precond(&x);
    let res: Vec<f64> = c.mul_vec(&solution).iter().zip(r).map(|(a, b)| b - a).collect();
    Ok(SolveReport {
        solution,
        iterations,
        residual_history: history,
        converged,
        true_residual: norm2(&res) / beta,
    })
}
