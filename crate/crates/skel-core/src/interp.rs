//! Cardinal functions on interfaces.
//!
//! Full circumferences use trigonometric cardinals on equispaced nodes;
//! arcs use inverse multiquadric RBF cardinals in the angle coordinate.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::TAU;

#[allow(unused_imports)] // unused when std is in the crate graph
use num_traits::Float as _;
use crate::cover::{AngleInterval, Cover};
use crate::linalg::{symmetric_eigenvalues, Cholesky, Mat};
use crate::{Error, Result};

/// Largest accepted condition number of the RBF kernel matrix.
pub const MAX_RBF_CONDITION: f64 = 1e14;

/// Tolerance for evaluating an arc cardinal slightly outside its arc.
pub const ARC_TOL: f64 = 1e-9;

const REFINE_STEPS: usize = 4;

/// Trigonometric cardinal `H_j` on `n` equispaced nodes `2 pi j / n`, by the
/// direct cosine sum.
pub fn fourier_cardinal(n: usize, j: usize, theta: f64) -> f64 {
    debug_assert!(n % 2 == 0 && j < n);
    let theta_j = TAU * j as f64 / n as f64;
    let d = theta - theta_j;
    let half = (n / 2) as i64;
    let mut s = 0.0;
    for k in -half..half {
        s += (k as f64 * d).cos();
    }
    s / n as f64
}

/// Fourier cardinals on `n` equispaced nodes starting at `theta0`.
#[derive(Clone, Debug)]
pub struct FourierBasis {
    n: usize,
    theta0: f64,
    // cos(k theta_j), sin(k theta_j) for k = 0..=n/2, row-major by node.
    cos_nodes: Vec<f64>,
    sin_nodes: Vec<f64>,
}

impl FourierBasis {
    pub fn new(n: usize, theta0: f64) -> Result<Self> {
        if n < 2 || n % 2 != 0 {
            return Err(Error::Interpolation(format!(
                "trigonometric cardinals need an even node count, got {n}"
            )));
        }
        let m = n / 2 + 1;
        let mut cos_nodes = vec![0.0; n * m];
        let mut sin_nodes = vec![0.0; n * m];
        for j in 0..n {
            let tj = theta0 + TAU * j as f64 / n as f64;
            for k in 0..m {
                let (s, c) = (k as f64 * tj).sin_cos();
                cos_nodes[j * m + k] = c;
                sin_nodes[j * m + k] = s;
            }
        }
        Ok(Self { n, theta0, cos_nodes, sin_nodes })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn node(&self, j: usize) -> f64 {
        self.theta0 + TAU * j as f64 / self.n as f64
    }

    /// All cardinals at `theta`, written into `out` (length `n`).
    pub fn cardinals_into(&self, theta: f64, out: &mut [f64]) {
        let n = self.n;
        let m = n / 2 + 1;
        let mut ck = [0.0f64; 64];
        let mut sk = [0.0f64; 64];
        let mut heap_c;
        let mut heap_s;
        let (cs, ss): (&mut [f64], &mut [f64]) = if m <= 64 {
            (&mut ck[..m], &mut sk[..m])
        } else {
            heap_c = vec![0.0; m];
            heap_s = vec![0.0; m];
            (&mut heap_c[..], &mut heap_s[..])
        };
        for k in 0..m {
            let (s, c) = (k as f64 * theta).sin_cos();
            cs[k] = c;
            ss[k] = s;
        }
        let inv_n = 1.0 / n as f64;
        for (j, o) in out.iter_mut().enumerate().take(n) {
            let cn = &self.cos_nodes[j * m..(j + 1) * m];
            let sn = &self.sin_nodes[j * m..(j + 1) * m];
            // 1 + 2 sum_{k=1}^{n/2-1} cos k d + cos (n/2) d
            let mut acc = 0.0;
            for k in 1..m - 1 {
                acc += cs[k] * cn[k] + ss[k] * sn[k];
            }
            let last = cs[m - 1] * cn[m - 1] + ss[m - 1] * sn[m - 1];
            *o = (1.0 + 2.0 * acc + last) * inv_n;
        }
    }

    pub fn cardinal(&self, j: usize, theta: f64) -> f64 {
        let n = self.n;
        let d = theta - self.node(j);
        let half = (n / 2) as i64;
        let mut s = 0.0;
        for k in -half..half {
            s += (k as f64 * d).cos();
        }
        s / n as f64
    }
}

/// Inverse multiquadric RBF cardinals on strictly increasing angles of an
/// arc.
#[derive(Clone, Debug)]
pub struct RbfBasis {
    angles: Vec<f64>,
    c2: f64,
    interval: AngleInterval,
    chol: Cholesky,
    condition: f64,
}

impl RbfBasis {
    pub fn new(angles: &[f64], c2: f64, interval: Option<AngleInterval>) -> Result<Self> {
        let n = angles.len();
        if n < 2 {
            return Err(Error::Interpolation(format!("RBF basis needs at least 2 nodes, got {n}")));
        }
        if !(c2 > 0.0) {
            return Err(Error::Interpolation(format!("shape parameter c^2 = {c2} must be positive")));
        }
        if angles.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::Interpolation("RBF node angles must be strictly increasing".into()));
        }
        let interval = interval.unwrap_or(AngleInterval { start: angles[0], end: angles[n - 1] });
        let k = Mat::from_fn(n, n, |l, m| imq(angles[l] - angles[m], c2));
        let ev = symmetric_eigenvalues(&k);
        let (lo, hi) = (ev[0], ev[n - 1]);
        let condition = if lo > 0.0 { hi / lo } else { f64::INFINITY };
        if !(condition <= MAX_RBF_CONDITION) {
            return Err(Error::Interpolation(format!(
                "RBF kernel matrix is numerically singular (condition estimate {condition:.3e} \
                 for {n} nodes); use a larger c^2 or fewer nodes"
            )));
        }
        let chol = Cholesky::factor(k).map_err(|e| {
            Error::Interpolation(format!("RBF kernel factorization failed: {e}; use a larger c^2"))
        })?;
        Ok(Self { angles: angles.to_vec(), c2, interval, chol, condition })
    }

    pub fn len(&self) -> usize {
        self.angles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.angles.is_empty()
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    pub fn shape(&self) -> f64 {
        self.c2
    }

    pub fn interval(&self) -> AngleInterval {
        self.interval
    }

    /// Eigenvalue ratio of the kernel matrix.
    pub fn condition(&self) -> f64 {
        self.condition
    }

    pub fn kernel(&self) -> &Mat {
        self.chol.matrix()
    }

    /// Map `theta` into the arc's angle range or report it outside.
    pub fn locate(&self, theta: f64) -> Result<f64> {
        let iv = self.interval;
        if theta >= iv.start - ARC_TOL && theta <= iv.end + ARC_TOL {
            return Ok(theta.max(iv.start).min(iv.end));
        }
        let turns = ((theta - iv.start) / TAU).floor();
        for t in [theta - turns * TAU, theta - (turns + 1.0) * TAU, theta - (turns - 1.0) * TAU] {
            if t >= iv.start - ARC_TOL && t <= iv.end + ARC_TOL {
                return Ok(t.max(iv.start).min(iv.end));
            }
        }
        Err(Error::Evaluation(format!(
            "angle {theta} outside the arc [{}, {}]",
            iv.start, iv.end
        )))
    }

    /// All cardinals at `theta`: the solution of `K w = phi(theta)`.
    pub fn cardinals(&self, theta: f64) -> Result<Vec<f64>> {
        let t = self.locate(theta)?;
        let phi: Vec<f64> = self.angles.iter().map(|&a| imq(t - a, self.c2)).collect();
        Ok(self.chol.solve_refined(&phi, REFINE_STEPS))
    }
}

fn imq(d: f64, c2: f64) -> f64 {
    1.0 / (d * d + c2).sqrt()
}

/// Interpolant attached to one interface piece.
#[derive(Clone, Debug)]
pub enum InterfaceInterpolant {
    Fourier(FourierBasis),
    Rbf(RbfBasis),
}

impl InterfaceInterpolant {
    pub fn len(&self) -> usize {
        match self {
            Self::Fourier(b) => b.len(),
            Self::Rbf(b) => b.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn eval_cardinal(&self, j: usize, theta: f64) -> Result<f64> {
        if j >= self.len() {
            return Err(Error::Evaluation(format!(
                "cardinal index {j} outside a stencil of {}",
                self.len()
            )));
        }
        match self {
            Self::Fourier(b) => Ok(b.cardinal(j, theta)),
            Self::Rbf(b) => Ok(b.cardinals(theta)?[j]),
        }
    }

    /// All cardinals at `theta`.
    pub fn cardinals(&self, theta: f64) -> Result<Vec<f64>> {
        match self {
            Self::Fourier(b) => {
                let mut out = vec![0.0; b.len()];
                b.cardinals_into(theta, &mut out);
                Ok(out)
            }
            Self::Rbf(b) => b.cardinals(theta),
        }
    }

    pub fn interpolate(&self, values: &[f64], theta: f64) -> Result<f64> {
        if values.len() != self.len() {
            return Err(Error::Evaluation(format!(
                "{} nodal values for a stencil of {}",
                values.len(),
                self.len()
            )));
        }
        let h = self.cardinals(theta)?;
        Ok(h.iter().zip(values).map(|(a, b)| a * b).sum())
    }
}

/// Interpolants of every interface piece of a cover, indexed by subdomain
/// and arc.
#[derive(Clone, Debug)]
pub struct InterpolantSet {
    pub per_subdomain: Vec<Vec<InterfaceInterpolant>>,
}

impl InterpolantSet {
    pub fn build(cover: &Cover, c2: f64) -> Result<Self> {
        let mut per_subdomain = Vec::with_capacity(cover.subdomains.len());
        for s in &cover.subdomains {
            let mut arcs = Vec::with_capacity(s.arcs.len());
            for arc in &s.arcs {
                let thetas: Vec<f64> = arc.knots.iter().map(|&k| cover.knots[k].host.theta).collect();
                let interp = if arc.interval.is_full_circle() {
                    InterfaceInterpolant::Fourier(FourierBasis::new(thetas.len(), thetas[0])?)
                } else {
                    let b = RbfBasis::new(&thetas, c2, Some(arc.interval)).map_err(|e| {
                        Error::Interpolation(format!("subdomain {}: {e}", s.id))
                    })?;
                    InterfaceInterpolant::Rbf(b)
                };
                arcs.push(interp);
            }
            per_subdomain.push(arcs);
        }
        Ok(Self { per_subdomain })
    }

    pub fn get(&self, subdomain: usize, arc: usize) -> &InterfaceInterpolant {
        &self.per_subdomain[subdomain][arc]
    }
}
