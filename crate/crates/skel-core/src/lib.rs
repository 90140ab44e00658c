//! Explicit substructuring for 2D linear elliptic Dirichlet problems on an
//! overlapping cover of circles.
//!
//! The domain is embedded in a lattice of overlapping discs. The unknowns are
//! the solution values at knots placed on the circle arcs that lie inside the
//! domain. Each knot contributes one row of a sparse, explicit system
//! `C u = r`:
//!
//! - knots owned by a *floating* disc (fully inside the domain) get their row
//!   from local boundary value problems solved by polar pseudospectral
//!   collocation ([`spectral`]);
//! - knots owned by a *perimeter* disc get their row from Monte Carlo
//!   integration of the stopped diffusion associated with the operator
//!   ([`feynmankac`]).
//!
//! The assembled system is solved with GMRES right-preconditioned by a
//! restricted additive Schwarz operator ([`krylov`]).
//!
//! The crate is `no_std` and needs only `alloc`. Parallel execution is
//! injected through [`runner::TaskRunner`]; file formats and the command line
//! driver live in the companion `skel` crate.
#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod assembly;
pub mod cover;
pub mod diagnostics;
mod error;
pub mod feynmankac;
pub mod geometry;
pub mod interp;
pub mod krylov;
pub mod linalg;
pub mod problem;
pub mod runner;
pub mod sparse;
pub mod spectral;

pub use error::{Error, Result};
pub use geometry::{Point, RectDomain};
