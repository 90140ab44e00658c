//! Polar pseudospectral collocation on a disc.
//!
//! The disc is sampled on a tensor grid of `n_r` Chebyshev radii and `n_theta`
//! equispaced angles. Radial derivatives use the diameter trick: the
//! Chebyshev grid with `N = 2 n_r - 1` points spans `[-R, R]`, so no node
//! falls on the centre, and the value at `(-r, theta)` is read from
//! `(r, theta + pi)`. Ring 0 is the circumference.

use alloc::format;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{PI, TAU};

use crate::cover::Subdomain;
use crate::interp::FourierBasis;
use crate::linalg::{norm2, refine, Mat, Qr};
use crate::problem::EllipticProblem;
use crate::{Error, Point, Result};
#[allow(unused_imports)] // unused when std is in the crate graph
use num_traits::Float as _;

/// Per-node coefficients of `L + c`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct LocalCoeffs {
    /// `(a_xx, a_xy, a_yy)`
    pub a: [f64; 3],
    pub b: [f64; 2],
    pub c: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CartesianDerivative {
    X,
    Y,
    XX,
    XY,
    YY,
}

#[derive(Clone, Debug)]
pub struct SpectralGrid {
    center: Point,
    radius: f64,
    n_theta: usize,
    n_r: usize,
    theta0: f64,
    cheb: Vec<f64>,
    bary: Vec<f64>,
    d1: Mat,
    d2: Mat,
    f1: Mat,
    f2: Mat,
    angular: FourierBasis,
}

impl SpectralGrid {
    pub fn new(center: Point, radius: f64, n_theta: usize, n_r: usize) -> Result<Self> {
        Self::with_offset(center, radius, n_theta, n_r, 0.0)
    }

    /// Grid whose angles are `theta0 + 2 pi j / n_theta`.
    pub fn with_offset(center: Point, radius: f64, n_theta: usize, n_r: usize, theta0: f64) -> Result<Self> {
        if n_theta < 4 || n_theta % 2 != 0 {
            return Err(Error::Config(format!(
                "angular node count must be even and at least 4, got {n_theta}"
            )));
        }
        if n_r < 4 {
            return Err(Error::Config(format!("radial node count must be at least 4, got {n_r}")));
        }
        if !(radius > 0.0) {
            return Err(Error::Config(format!("disc radius must be positive, got {radius}")));
        }
        let big_n = 2 * n_r - 1;
        let (cheb, d1) = cheb_matrix(big_n);
        let d2 = d1.matmul(&d1);
        let (f1, f2) = fourier_matrices(n_theta);
        let mut bary: Vec<f64> = (0..=big_n).map(|k| if k % 2 == 0 { 1.0 } else { -1.0 }).collect();
        bary[0] *= 0.5;
        bary[big_n] *= 0.5;
        Ok(Self {
            center,
            radius,
            n_theta,
            n_r,
            theta0,
            cheb,
            bary,
            d1,
            d2,
            f1,
            f2,
            angular: FourierBasis::new(n_theta, theta0)?,
        })
    }

    /// Grid on a floating subdomain whose stencil has `n_theta` knots.
    pub fn for_subdomain(sd: &Subdomain, n_theta: usize, n_r: usize) -> Result<Self> {
        if !sd.is_floating() {
            return Err(Error::Config(format!(
                "subdomain {} is not floating; no spectral grid",
                sd.id
            )));
        }
        if sd.stencil_len() != n_theta {
            return Err(Error::Config(format!(
                "subdomain {} has {} interface knots but n_theta = {n_theta}",
                sd.id,
                sd.stencil_len()
            )));
        }
        Self::new(sd.center, sd.radius, n_theta, n_r)
    }

    pub fn len(&self) -> usize {
        self.n_theta * self.n_r
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn n_theta(&self) -> usize {
        self.n_theta
    }

    pub fn n_r(&self) -> usize {
        self.n_r
    }

    pub fn center(&self) -> Point {
        self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Radius of ring `k`.
    pub fn ring_radius(&self, k: usize) -> f64 {
        self.radius * self.cheb[k]
    }

    pub fn angle(&self, j: usize) -> f64 {
        self.theta0 + TAU * j as f64 / self.n_theta as f64
    }

    /// Node index of ring `k`, angle `j`.
    #[inline]
    pub fn index(&self, k: usize, j: usize) -> usize {
        k * self.n_theta + j
    }

    pub fn node(&self, idx: usize) -> Point {
        let (k, j) = (idx / self.n_theta, idx % self.n_theta);
        self.center.polar(self.ring_radius(k), self.angle(j))
    }

    pub fn nodes(&self) -> Vec<Point> {
        (0..self.len()).map(|i| self.node(i)).collect()
    }

    /// Indices of the circumference nodes, in angle order.
    pub fn boundary_indices(&self) -> core::ops::Range<usize> {
        0..self.n_theta
    }

    pub fn sample(&self, f: impl Fn(Point) -> f64) -> Vec<f64> {
        (0..self.len()).map(|i| f(self.node(i))).collect()
    }

    /// Matrix of `L + c` for per-node coefficients (no boundary rows).
    pub fn operator_matrix(&self, coeffs: &[LocalCoeffs]) -> Mat {
        assert_eq!(coeffs.len(), self.len());
        let m = self.n_theta;
        let half = m / 2;
        let big_n = 2 * self.n_r - 1;
        let inv_r = 1.0 / self.radius;
        let inv_r2 = inv_r * inv_r;
        let rows: Vec<[f64; 6]> = (0..self.len())
            .map(|idx| {
                let (k, j) = (idx / m, idx % m);
                polar_weights(&coeffs[idx], self.ring_radius(k), self.angle(j))
            })
            .collect();
        let mut a = Mat::zeros(self.len(), self.len());
        for col in 0..self.len() {
            let (l, jc) = (col / m, col % m);
            let out = a.col_mut(col);
            for (row, w) in rows.iter().enumerate() {
                let (k, j) = (row / m, row % m);
                let [rr, r1, tt, rt, t1, c] = *w;
                let opp = (j + half) % m;
                let mut v = 0.0;
                if jc == j {
                    v += rr * self.d2[(k, l)] * inv_r2 + r1 * self.d1[(k, l)] * inv_r;
                } else if jc == opp {
                    v += rr * self.d2[(k, big_n - l)] * inv_r2 + r1 * self.d1[(k, big_n - l)] * inv_r;
                }
                if l == k {
                    v += tt * self.f2[(j, jc)] + t1 * self.f1[(j, jc)];
                    if jc == j {
                        v += c;
                    }
                }
                v += rt * inv_r * (self.d1[(k, l)] * self.f1[(j, jc)] + self.d1[(k, big_n - l)] * self.f1[(opp, jc)]);
                out[row] = v;
            }
        }
        a
    }

    /// Cartesian differentiation matrix.
    pub fn derivative_matrix(&self, d: CartesianDerivative) -> Mat {
        let coeff = match d {
            CartesianDerivative::X => LocalCoeffs { b: [1.0, 0.0], ..Default::default() },
            CartesianDerivative::Y => LocalCoeffs { b: [0.0, 1.0], ..Default::default() },
            CartesianDerivative::XX => LocalCoeffs { a: [2.0, 0.0, 0.0], ..Default::default() },
            CartesianDerivative::XY => LocalCoeffs { a: [0.0, 1.0, 0.0], ..Default::default() },
            CartesianDerivative::YY => LocalCoeffs { a: [0.0, 0.0, 2.0], ..Default::default() },
        };
        self.operator_matrix(&vec![coeff; self.len()])
    }

    /// Coefficients of `problem` sampled at the grid nodes.
    pub fn sample_coeffs(&self, problem: &EllipticProblem) -> Result<Vec<LocalCoeffs>> {
        (0..self.len())
            .map(|i| {
                let p = self.node(i);
                problem.check_at(p)?;
                let b = problem.drift(p);
                Ok(LocalCoeffs { a: problem.diffusion(p), b: [b.x, b.y], c: problem.c.eval(p) })
            })
            .collect()
    }

    /// Collocation matrix of `L + c` with identity rows on the circumference.
    pub fn assemble_operator(&self, coeffs: &[LocalCoeffs]) -> Mat {
        let mut a = self.operator_matrix(coeffs);
        let n = self.len();
        for i in self.boundary_indices() {
            for j in 0..n {
                a[(i, j)] = 0.0;
            }
            a[(i, i)] = 1.0;
        }
        a
    }

    /// Weights `w` with `u(x) = w . u_grid` for fields on this grid.
    pub fn eval_weights(&self, x: Point) -> Result<Vec<f64>> {
        let d = x - self.center;
        let rho = d.norm();
        if !(rho <= self.radius * (1.0 + 1e-12)) {
            return Err(Error::Evaluation(format!(
                "point ({}, {}) is outside the disc of radius {} at ({}, {})",
                x.x, x.y, self.radius, self.center.x, self.center.y
            )));
        }
        let phi = libm::atan2(d.y, d.x);
        let m = self.n_theta;
        let mut h_fwd = vec![0.0; m];
        let mut h_back = vec![0.0; m];
        self.angular.cardinals_into(phi, &mut h_fwd);
        self.angular.cardinals_into(phi + PI, &mut h_back);
        let beta = self.radial_basis((rho / self.radius).min(1.0));
        let big_n = 2 * self.n_r - 1;
        let mut w = vec![0.0; self.len()];
        for l in 0..self.n_r {
            let (bp, bm) = (beta[l], beta[big_n - l]);
            let row = &mut w[l * m..(l + 1) * m];
            for j in 0..m {
                row[j] = bp * h_fwd[j] + bm * h_back[j];
            }
        }
        Ok(w)
    }

    /// Barycentric Lagrange basis of the full Chebyshev diameter at `s`.
    fn radial_basis(&self, s: f64) -> Vec<f64> {
        let np = self.cheb.len();
        let mut out = vec![0.0; np];
        if let Some(k) = self.cheb.iter().position(|&xk| xk == s) {
            out[k] = 1.0;
            return out;
        }
        let mut total = 0.0;
        for k in 0..np {
            let t = self.bary[k] / (s - self.cheb[k]);
            out[k] = t;
            total += t;
        }
        for v in &mut out {
            *v /= total;
        }
        out
    }

    pub fn eval_field(&self, field: &[f64], x: Point) -> Result<f64> {
        let w = self.eval_weights(x)?;
        Ok(w.iter().zip(field).map(|(a, b)| a * b).sum())
    }
}

/// Weights of `(u_rr, u_r, u_tt, u_rt, u_t, u)` in `L u + c u` at a node of
/// radius `r`, angle `theta`.
fn polar_weights(k: &LocalCoeffs, r: f64, theta: f64) -> [f64; 6] {
    let (s, c) = theta.sin_cos();
    let [axx, axy, ayy] = k.a;
    let (hx, hy) = (0.5 * axx, 0.5 * ayy);
    let [bx, by] = k.b;
    let (ss, cc, sc) = (s * s, c * c, s * c);
    let (ir, ir2) = (1.0 / r, 1.0 / (r * r));
    let rr = hx * cc + hy * ss + axy * sc;
    let r1 = (hx * ss + hy * cc - axy * sc) * ir + bx * c + by * s;
    let tt = (hx * ss + hy * cc - axy * sc) * ir2;
    let rt = (-2.0 * hx * sc + 2.0 * hy * sc + axy * (cc - ss)) * ir;
    let t1 = (2.0 * hx * sc - 2.0 * hy * sc - axy * (cc - ss)) * ir2 + (-bx * s + by * c) * ir;
    [rr, r1, tt, rt, t1, k.c]
}

/// Chebyshev points `cos(pi k / n)` and the differentiation matrix.
fn cheb_matrix(n: usize) -> (Vec<f64>, Mat) {
    let x: Vec<f64> = (0..=n).map(|k| (PI * k as f64 / n as f64).cos()).collect();
    let c = |k: usize| {
        let s = if k % 2 == 0 { 1.0 } else { -1.0 };
        if k == 0 || k == n {
            2.0 * s
        } else {
            s
        }
    };
    let mut d = Mat::zeros(n + 1, n + 1);
    for i in 0..=n {
        let mut row_sum = 0.0;
        for j in 0..=n {
            if i != j {
                let v = c(i) / c(j) / (x[i] - x[j]);
                d[(i, j)] = v;
                row_sum += v;
            }
        }
        d[(i, i)] = -row_sum;
    }
    (x, d)
}

/// First and second periodic spectral differentiation matrices on `m`
/// equispaced points (`m` even).
fn fourier_matrices(m: usize) -> (Mat, Mat) {
    let h = TAU / m as f64;
    let mut f1 = Mat::zeros(m, m);
    let mut f2 = Mat::zeros(m, m);
    for i in 0..m {
        for j in 0..m {
            if i == j {
                f2[(i, j)] = -PI * PI / (3.0 * h * h) - 1.0 / 6.0;
                continue;
            }
            let d = i as i64 - j as i64;
            let sign = if d.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
            let half = d as f64 * h / 2.0;
            f1[(i, j)] = 0.5 * sign / half.tan();
            let s = half.sin();
            f2[(i, j)] = -0.5 * sign / (s * s);
        }
    }
    (f1, f2)
}

const REFINE_STEPS: usize = 1;

/// Factorized collocation operator of one disc together with the fields of
/// its cardinal problems.
#[derive(Debug)]
pub struct LocalSolver {
    matrix: Mat,
    qr: Qr,
    cardinal_fields: Vec<Vec<f64>>,
}

impl LocalSolver {
    /// Factorize the row-replaced operator and solve every cardinal problem.
    pub fn new(grid: &SpectralGrid, coeffs: &[LocalCoeffs]) -> Result<Self> {
        let matrix = grid.assemble_operator(coeffs);
        Self::from_matrix(grid, matrix)
    }

    pub fn from_matrix(grid: &SpectralGrid, matrix: Mat) -> Result<Self> {
        let qr = Qr::factor(matrix.clone()).map_err(|e| {
            Error::Factorization(format!("local collocation operator: {e}"))
        })?;
        let n = grid.len();
        let cardinal_fields = grid
            .boundary_indices()
            .map(|j| {
                let mut rhs = vec![0.0; n];
                rhs[j] = -1.0;
                let mut x = rhs.clone();
                qr.solve_in_place(&mut x);
                refine(&matrix, &rhs, &mut x, REFINE_STEPS, |r| qr.solve_in_place(r));
                for (l, v) in x.iter_mut().take(grid.n_theta()).enumerate() {
                    *v = if l == j { -1.0 } else { 0.0 };
                }
                x
            })
            .collect();
        Ok(Self { matrix, qr, cardinal_fields })
    }

    pub fn matrix(&self) -> &Mat {
        &self.matrix
    }

    /// QR solve followed by one refinement step.
    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let mut x = self.qr.solve(rhs);
        refine(&self.matrix, rhs, &mut x, REFINE_STEPS, |r| self.qr.solve_in_place(r));
        x
    }

    /// Fields `G_j` with `(L + c) G_j = 0` inside and `G_j = -e_j` on the
    /// circumference.
    pub fn cardinal_fields(&self) -> &[Vec<f64>] {
        &self.cardinal_fields
    }

    /// Solve `(L + c) w + f = 0` with Dirichlet data `boundary` (one value
    /// per circumference node).
    pub fn solve_dirichlet(&self, grid: &SpectralGrid, f: &[f64], boundary: &[f64]) -> Vec<f64> {
        let mut rhs: Vec<f64> = f.iter().map(|v| -v).collect();
        for (i, b) in grid.boundary_indices().zip(boundary) {
            rhs[i] = *b;
        }
        let mut x = self.solve(&rhs);
        for (i, b) in grid.boundary_indices().zip(boundary) {
            x[i] = *b;
        }
        x
    }

    /// Field `B` with `(L + c) B + f = 0` and zero boundary data.
    pub fn solve_source(&self, grid: &SpectralGrid, problem: &EllipticProblem) -> Vec<f64> {
        let f = match problem.f.as_const() {
            Some(0.0) => return vec![0.0; grid.len()],
            _ => grid.sample(|p| problem.f.eval(p)),
        };
        self.solve_dirichlet(grid, &f, &vec![0.0; grid.n_theta()])
    }

    /// Two-norm condition number estimate: power iteration on `A^T A` for
    /// the largest singular value, inverse iteration through the QR factors
    /// for the smallest.
    pub fn condition_estimate(&self, iters: usize) -> f64 {
        let n = self.matrix.nrows();
        let start: Vec<f64> = (0..n).map(|i| 1.0 + 0.5 * ((i * 7919) % 101) as f64 / 101.0).collect();
        let mut x = start.clone();
        let mut smax = 0.0;
        for _ in 0..iters {
            let nx = norm2(&x);
            x.iter_mut().for_each(|v| *v /= nx);
            let y = self.matrix.mul_vec(&x);
            let z = self.matrix.mul_vec_transpose(&y);
            let est = norm2(&y);
            let done = (est - smax).abs() <= 1e-8 * est;
            smax = est;
            x = z;
            if done {
                break;
            }
        }
        let mut x = start;
        let mut inv = 0.0;
        for _ in 0..iters {
            let nx = norm2(&x);
            x.iter_mut().for_each(|v| *v /= nx);
            let y = self.qr.solve_transpose(&x);
            let z = self.qr.solve(&y);
            let est = norm2(&y);
            let done = (est - inv).abs() <= 1e-8 * est;
            inv = est;
            x = z;
            if done {
                break;
            }
        }
        smax * inv
    }
}

/// Reuses factorizations across discs whose collocation operators are
/// identical: same grid shape, same radius and bitwise-equal coefficient
/// samples.
#[derive(Debug, Default)]
pub struct SolverCache {
    entries: Vec<(u64, (usize, usize, u64), Vec<LocalCoeffs>, Arc<LocalSolver>)>,
}

impl SolverCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get_or_build(&mut self, grid: &SpectralGrid, coeffs: &[LocalCoeffs]) -> Result<Arc<LocalSolver>> {
        let shape = (grid.n_theta(), grid.n_r(), grid.radius().to_bits());
        let key = fingerprint(coeffs);
        if let Some(e) = self
            .entries
            .iter()
            .find(|e| e.0 == key && e.1 == shape && e.2 == coeffs)
        {
            return Ok(e.3.clone());
        }
        let solver = Arc::new(LocalSolver::new(grid, coeffs)?);
        self.entries.push((key, shape, coeffs.to_vec(), solver.clone()));
        Ok(solver)
    }
}

fn fingerprint(coeffs: &[LocalCoeffs]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for k in coeffs {
        for v in [k.a[0], k.a[1], k.a[2], k.b[0], k.b[1], k.c] {
            h ^= v.to_bits();
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Lu;
    use crate::problem::{builtin_problem, manufactured_u};

    fn laplace_coeffs(n: usize) -> Vec<LocalCoeffs> {
        vec![LocalCoeffs { a: [2.0, 0.0, 2.0], ..Default::default() }; n]
    }

    fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn grid_size_and_boundary_ring() {
        let g = SpectralGrid::new(Point::new(0.0, 0.0), 9.0, 44, 22).unwrap();
        assert_eq!(g.len(), 968);
        for j in g.boundary_indices() {
            let p = g.node(j);
            assert!((p.norm() - 9.0).abs() < 1e-12);
            assert!((libm::atan2(p.y, p.x) - wrap_pi(TAU * j as f64 / 44.0)).abs() < 1e-12);
        }
        assert!(g.ring_radius(21) > 0.0);
        assert!(SpectralGrid::new(Point::new(0.0, 0.0), 1.0, 43, 22).is_err());
        assert!(SpectralGrid::new(Point::new(0.0, 0.0), 1.0, 44, 3).is_err());
    }

    fn wrap_pi(t: f64) -> f64 {
        if t > PI {
            t - TAU
        } else {
            t
        }
    }

    #[test]
    fn derivative_matrices_on_polynomials() {
        let g = SpectralGrid::new(Point::new(0.3, -0.2), 1.0, 44, 22).unwrap();
        let ones = vec![1.0; g.len()];
        let xs = g.sample(|p| p.x);
        let ys = g.sample(|p| p.y);
        let xy = g.sample(|p| p.x * p.y);
        let xx = g.sample(|p| p.x * p.x);
        for d in [
            CartesianDerivative::X,
            CartesianDerivative::Y,
            CartesianDerivative::XX,
            CartesianDerivative::XY,
            CartesianDerivative::YY,
        ] {
            let m = g.derivative_matrix(d);
            let z = m.mul_vec(&ones);
            assert!(z.iter().all(|v| v.abs() <= 1e-9 * m.max_abs()), "{d:?}");
        }
        let dx = g.derivative_matrix(CartesianDerivative::X).mul_vec(&xs);
        assert!(dx.iter().all(|v| (v - 1.0).abs() <= 1e-9));
        let dy = g.derivative_matrix(CartesianDerivative::Y).mul_vec(&ys);
        assert!(dy.iter().all(|v| (v - 1.0).abs() <= 1e-9));
        let dxy = g.derivative_matrix(CartesianDerivative::XY).mul_vec(&xy);
        assert!(dxy.iter().all(|v| (v - 1.0).abs() <= 1e-8));
        let dxx = g.derivative_matrix(CartesianDerivative::XX).mul_vec(&xx);
        assert!(dxx.iter().all(|v| (v - 2.0).abs() <= 1e-8));
    }

    #[test]
    fn harmonic_field_is_annihilated() {
        let g = SpectralGrid::new(Point::new(5.0, -5.0), 9.0, 44, 22).unwrap();
        let a = g.operator_matrix(&laplace_coeffs(g.len()));
        let xy = g.sample(|p| p.x * p.y);
        let r = a.mul_vec(&xy);
        let scale = a.max_abs() * xy.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(r.iter().all(|v| v.abs() <= 1e-7 * scale.max(1.0)));
    }

    #[test]
    fn reaction_only_operator_is_minus_identity() {
        let g = SpectralGrid::new(Point::new(0.0, 0.0), 2.0, 8, 5).unwrap();
        let coeffs = vec![LocalCoeffs { c: -1.0, ..Default::default() }; g.len()];
        let a = g.assemble_operator(&coeffs);
        for i in 0..g.len() {
            for j in 0..g.len() {
                let expect = if i != j {
                    0.0
                } else if i < g.n_theta() {
                    1.0
                } else {
                    -1.0
                };
                assert_eq!(a[(i, j)], expect);
            }
        }
    }

    #[test]
    fn multi_rhs_solve_matches_independent_direct_solves() {
        let g = SpectralGrid::new(Point::new(0.0, 0.0), 9.0, 44, 22).unwrap();
        let s = LocalSolver::new(&g, &laplace_coeffs(g.len())).unwrap();
        let lu = Lu::factor(s.matrix().clone()).unwrap();
        let direct = |b: &[f64]| {
            let mut x = lu.solve(b);
            refine(s.matrix(), b, &mut x, 1, |r| lu.solve_in_place(r));
            x
        };
        for (j, field) in s.cardinal_fields().iter().enumerate() {
            let mut rhs = vec![0.0; g.len()];
            rhs[j] = -1.0;
            assert!(max_abs_diff(field, &direct(&rhs)) <= 1e-12);
        }
        let mut b = vec![0.0; g.len()];
        b[3] = 2.0;
        b[500] = -1.0;
        assert!(max_abs_diff(&s.solve(&b), &direct(&b)) <= 1e-12);
    }

    #[test]
    fn round_trip_recovers_random_vector() {
        let g = SpectralGrid::new(Point::new(0.0, 0.0), 9.0, 20, 10).unwrap();
        let s = LocalSolver::new(&g, &laplace_coeffs(g.len())).unwrap();
        let w: Vec<f64> = (0..g.len()).map(|i| ((i * 37 % 17) as f64 - 8.0) / 3.0).collect();
        let back = s.solve(&s.matrix().mul_vec(&w));
        let err = max_abs_diff(&back, &w) / norm2(&w);
        assert!(err <= 1e-9, "{err:e}");
    }

    #[test]
    fn cardinal_fields_sum_to_minus_one() {
        let g = SpectralGrid::new(Point::new(0.0, 0.0), 9.0, 44, 22).unwrap();
        let s = LocalSolver::new(&g, &laplace_coeffs(g.len())).unwrap();
        for i in 0..g.len() {
            let sum: f64 = s.cardinal_fields().iter().map(|f| f[i]).sum();
            assert!((sum + 1.0).abs() <= 1e-10, "node {i}: {sum}");
        }
        for (j, f) in s.cardinal_fields().iter().enumerate() {
            for l in g.boundary_indices() {
                assert_eq!(f[l], if l == j { -1.0 } else { 0.0 });
            }
        }
    }

    #[test]
    fn helmholtz_cardinals_are_bounded() {
        let g = SpectralGrid::new(Point::new(0.0, 0.0), 1.0, 44, 22).unwrap();
        let coeffs = vec![LocalCoeffs { a: [2.0, 0.0, 2.0], c: -1.0, ..Default::default() }; g.len()];
        let s = LocalSolver::new(&g, &coeffs).unwrap();
        for j in [0, 11, 30] {
            // Interior node on the ring next to the boundary facing knot j.
            let v = s.cardinal_fields()[j][g.index(1, j)];
            assert!(v < 0.0 && v > -1.0, "{v}");
        }
        for i in g.n_theta()..g.len() {
            let sum: f64 = s.cardinal_fields().iter().map(|f| f[i]).sum();
            assert!(sum > -1.0 && sum < 0.0);
        }
    }

    #[test]
    fn exit_time_source_problem() {
        let r = 1.7;
        let g = SpectralGrid::new(Point::new(1.0, 2.0), r, 44, 22).unwrap();
        let p = builtin_problem("disc_exit_time").unwrap();
        let s = LocalSolver::new(&g, &g.sample_coeffs(&p).unwrap()).unwrap();
        let b = s.solve_source(&g, &p);
        for i in 0..g.len() {
            let d = g.node(i) - g.center();
            let expect = (r * r - d.dot(d)) / 2.0;
            assert!((b[i] - expect).abs() <= 1e-10);
        }
        let zero = builtin_problem("harmonic_xy").unwrap();
        assert!(s.solve_source(&g, &zero).iter().all(|v| *v == 0.0));
    }

    #[test]
    fn builtin_problem_local_solve_is_spectrally_accurate() {
        let p = builtin_problem("paper46").unwrap();
        let g = SpectralGrid::new(Point::new(-15.0, 25.0), 9.0, 44, 22).unwrap();
        let s = LocalSolver::new(&g, &g.sample_coeffs(&p).unwrap()).unwrap();
        let f = g.sample(|q| p.f.eval(q));
        let bnd: Vec<f64> = g.boundary_indices().map(|j| manufactured_u(g.node(j))).collect();
        let w = s.solve_dirichlet(&g, &f, &bnd);
        let exact = g.sample(manufactured_u);
        assert!(max_abs_diff(&w, &exact) <= 1e-10, "{:e}", max_abs_diff(&w, &exact));
        for t in 0..50 {
            let a = 0.7 * t as f64;
            let rad = 8.9 * ((t * 13 % 50) as f64 / 50.0);
            let q = g.center().polar(rad, a);
            let v = g.eval_field(&w, q).unwrap();
            assert!((v - manufactured_u(q)).abs() <= 1e-9);
        }
        let kappa = s.condition_estimate(100);
        assert!((1e4..=1e7).contains(&kappa), "{kappa:e}");
    }

    #[test]
    fn off_grid_evaluation() {
        let g = SpectralGrid::new(Point::new(0.0, 0.0), 1.0, 44, 22).unwrap();
        let f = g.sample(|p| p.x);
        assert!((g.eval_field(&f, Point::new(0.3, 0.4)).unwrap() - 0.3).abs() <= 1e-12);
        let c = vec![2.5; g.len()];
        assert!((g.eval_field(&c, Point::new(-0.1, 0.7)).unwrap() - 2.5).abs() <= 1e-12);
        assert!((g.eval_field(&c, Point::new(0.0, 0.0)).unwrap() - 2.5).abs() <= 1e-12);
        assert!(matches!(g.eval_field(&c, Point::new(1.1, 0.0)), Err(Error::Evaluation(_))));
        // On a node, the weights are a unit vector.
        let w = g.eval_weights(g.node(g.index(3, 5))).unwrap();
        assert!((w[g.index(3, 5)] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cache_reuses_identical_operators() {
        let p = builtin_problem("paper46").unwrap();
        let mut cache = SolverCache::new();
        let g1 = SpectralGrid::new(Point::new(0.0, 0.0), 2.0, 8, 5).unwrap();
        let g2 = SpectralGrid::new(Point::new(10.0, 0.0), 2.0, 8, 5).unwrap();
        let g3 = SpectralGrid::new(Point::new(10.0, 0.0), 3.0, 8, 5).unwrap();
        let a = cache.get_or_build(&g1, &g1.sample_coeffs(&p).unwrap()).unwrap();
        let b = cache.get_or_build(&g2, &g2.sample_coeffs(&p).unwrap()).unwrap();
        assert!(Arc::ptr_eq(&a, &b));
        cache.get_or_build(&g3, &g3.sample_coeffs(&p).unwrap()).unwrap();
        assert_eq!(cache.len(), 2);
    }
}
