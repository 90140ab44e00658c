//! Restricted additive Schwarz preconditioned GMRES for the interfacial
//! system, plus a dense direct solve used as a reference.

mod band;
mod gmres;
mod partition;
mod ras;

pub use band::{rcm_order, BandLu};
pub use gmres::{gmres, GmresConfig, SolveReport};
pub use partition::{partition_graph, Partition};
pub use ras::{apply_ras, build_ras, LocalFactor, RasPreconditioner, DENSE_LIMIT};

use alloc::format;
use alloc::vec::Vec;

use crate::linalg::Lu;
use crate::sparse::CsrMatrix;
use crate::{Error, Result};

/// Largest system `dense_solve` will densify.
pub const DENSE_SOLVE_LIMIT: usize = 20_000;

/// Partial-pivoted LU solve of the densified system.
pub fn dense_solve(c: &CsrMatrix, r: &[f64]) -> Result<Vec<f64>> {
    let n = c.nrows();
    if c.ncols() != n || r.len() != n {
        return Err(Error::Solver(format!("dense_solve: shape {}x{} with rhs {}", n, c.ncols(), r.len())));
    }
    if n > DENSE_SOLVE_LIMIT {
        return Err(Error::Solver(format!("dense_solve: N = {n} exceeds {DENSE_SOLVE_LIMIT}")));
    }
    let lu = Lu::factor(c.to_dense()).map_err(|e| Error::Solver(format!("dense_solve: {e}")))?;
    Ok(lu.solve(r))
}
