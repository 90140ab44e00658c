//! Dense linear algebra: column-major matrices, partial-pivoted LU,
//! Householder QR, Cholesky with compensated iterative refinement, and a
//! cyclic Jacobi eigenvalue routine for small symmetric matrices.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // unused when std is in the crate graph
use num_traits::Float as _;
use crate::{Error, Result};

/// Dense column-major matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Mat {
    nrows: usize,
    ncols: usize,
    data: Vec<f64>,
}

impl Mat {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self {
            nrows,
            ncols,
            data: vec![0.0; nrows * ncols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_fn(nrows: usize, ncols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(nrows * ncols);
        for j in 0..ncols {
            for i in 0..nrows {
                data.push(f(i, j));
            }
        }
        Self { nrows, ncols, data }
    }

    /// Build from row slices (convenient in tests).
    pub fn from_rows(rows: &[&[f64]]) -> Self {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, |r| r.len());
        Self::from_fn(nrows, ncols, |i, j| rows[i][j])
    }

    #[inline]
    pub fn nrows(&self) -> usize {
        self.nrows
    }

    #[inline]
    pub fn ncols(&self) -> usize {
        self.ncols
    }

    #[inline]
    pub fn col(&self, j: usize) -> &[f64] {
        &self.data[j * self.nrows..(j + 1) * self.nrows]
    }

    #[inline]
    pub fn col_mut(&mut self, j: usize) -> &mut [f64] {
        &mut self.data[j * self.nrows..(j + 1) * self.nrows]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Column `k` shared and column `j` mutable, `k < j`.
    #[inline]
    fn col_pair(&mut self, k: usize, j: usize) -> (&[f64], &mut [f64]) {
        debug_assert!(k < j);
        let n = self.nrows;
        let (lo, hi) = self.data.split_at_mut(j * n);
        (&lo[k * n..(k + 1) * n], &mut hi[..n])
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        (0..self.ncols).map(|j| self[(i, j)]).collect()
    }

    pub fn set_row(&mut self, i: usize, values: &[f64]) {
        for (j, &v) in values.iter().enumerate() {
            self[(i, j)] = v;
        }
    }

    pub fn transpose(&self) -> Mat {
        Mat::from_fn(self.ncols, self.nrows, |i, j| self[(j, i)])
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.ncols);
        let mut y = vec![0.0; self.nrows];
        for (j, &xj) in x.iter().enumerate() {
            if xj != 0.0 {
                for (yi, a) in y.iter_mut().zip(self.col(j)) {
                    *yi += xj * a;
                }
            }
        }
        y
    }

    pub fn mul_vec_transpose(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.nrows);
        (0..self.ncols).map(|j| dot(self.col(j), x)).collect()
    }

    pub fn matmul(&self, other: &Mat) -> Mat {
        assert_eq!(self.ncols, other.nrows);
        let mut out = Mat::zeros(self.nrows, other.ncols);
        for j in 0..other.ncols {
            let oc = other.col(j);
            let dst = out.col_mut(j);
            for (k, &b) in oc.iter().enumerate() {
                if b != 0.0 {
                    for (d, a) in dst.iter_mut().zip(self.col(k)) {
                        *d += b * a;
                    }
                }
            }
        }
        out
    }

    /// `self += alpha * diag(w) * other`, row-scaled accumulation.
    pub fn add_row_scaled(&mut self, w: &[f64], alpha: f64, other: &Mat) {
        assert_eq!((self.nrows, self.ncols), (other.nrows, other.ncols));
        assert_eq!(w.len(), self.nrows);
        for j in 0..self.ncols {
            let src = other.col(j);
            let dst = &mut self.data[j * self.nrows..(j + 1) * self.nrows];
            for i in 0..dst.len() {
                dst[i] += alpha * w[i] * src[i];
            }
        }
    }
}

impl core::ops::Index<(usize, usize)> for Mat {
    type Output = f64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[j * self.nrows + i]
    }
}

impl core::ops::IndexMut<(usize, usize)> for Mat {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[j * self.nrows + i]
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `y -= alpha * x`.
#[inline]
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi -= alpha * xi;
    }
}

pub fn norm2(v: &[f64]) -> f64 {
    let scale = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if scale == 0.0 || !scale.is_finite() {
        return scale;
    }
    let s: f64 = v.iter().map(|x| (x / scale) * (x / scale)).sum();
    scale * s.sqrt()
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, libm::fma(a, b, -p))
}

/// Dot product evaluated as if in twice the working precision
/// (Ogita, Rump and Oishi's `Dot2`).
pub fn dot2(a: &[f64], b: &[f64]) -> f64 {
    let mut p = 0.0;
    let mut s = 0.0;
    for (&x, &y) in a.iter().zip(b) {
        let (h, r) = two_prod(x, y);
        let (np, q) = two_sum(p, h);
        p = np;
        s += q + r;
    }
    p + s
}

/// `b - A x`, each component accumulated as in [`dot2`].
pub fn residual_compensated(a: &Mat, x: &[f64], b: &[f64]) -> Vec<f64> {
    let n = a.nrows;
    let mut hi = b.to_vec();
    let mut lo = vec![0.0; n];
    for (j, &xj) in x.iter().enumerate() {
        let col = a.col(j);
        for i in 0..n {
            let (h, r) = two_prod(col[i], -xj);
            let (s, q) = two_sum(hi[i], h);
            hi[i] = s;
            lo[i] += q + r;
        }
    }
    hi.iter().zip(&lo).map(|(h, l)| h + l).collect()
}

/// Iterative refinement of `x` for `A x = b` with a compensated residual;
/// `solve` applies an approximate inverse in place.
pub fn refine(a: &Mat, b: &[f64], x: &mut [f64], steps: usize, solve: impl Fn(&mut [f64])) {
    for _ in 0..steps {
        let mut r = residual_compensated(a, x, b);
        solve(&mut r);
        for (xi, ri) in x.iter_mut().zip(&r) {
            *xi += ri;
        }
    }
}

/// LU factorization with partial pivoting, `P A = L U`.
#[derive(Clone, Debug)]
pub struct Lu {
    lu: Mat,
    piv: Vec<usize>,
}

const LU_BLOCK: usize = 64;

impl Lu {
    /// Blocked right-looking factorization. The trailing update is deferred
    /// per panel, which leaves the arithmetic identical to the unblocked
    /// algorithm while keeping each updated column in cache.
    pub fn factor(mut a: Mat) -> Result<Self> {
        let n = a.nrows;
        if n != a.ncols {
            return Err(Error::Factorization("LU of a non-square matrix".into()));
        }
        let scale = a.max_abs();
        if n > 0 && (scale == 0.0 || !scale.is_finite()) {
            return Err(Error::Factorization("matrix is zero or non-finite".into()));
        }
        let tol = scale * f64::EPSILON * (n as f64);
        let mut piv = vec![0usize; n];
        let mut kb = 0;
        while kb < n {
            let kend = (kb + LU_BLOCK).min(n);
            for k in kb..kend {
                let col = a.col(k);
                let mut p = k;
                let mut best = col[k].abs();
                for (i, v) in col.iter().enumerate().skip(k + 1) {
                    if v.abs() > best {
                        best = v.abs();
                        p = i;
                    }
                }
                if best <= tol {
                    return Err(Error::Factorization(alloc::format!(
                        "singular matrix: pivot {best:e} at column {k}"
                    )));
                }
                piv[k] = p;
                if p != k {
                    for j in 0..n {
                        a.data.swap(j * n + k, j * n + p);
                    }
                }
                let inv = 1.0 / a[(k, k)];
                a.col_mut(k)[k + 1..].iter_mut().for_each(|v| *v *= inv);
                for j in k + 1..kend {
                    let (ck, cj) = a.col_pair(k, j);
                    let akj = cj[k];
                    if akj != 0.0 {
                        axpy(akj, &ck[k + 1..], &mut cj[k + 1..]);
                    }
                }
            }
            for j in kend..n {
                for k in kb..kend {
                    let (ck, cj) = a.col_pair(k, j);
                    let akj = cj[k];
                    if akj != 0.0 {
                        axpy(akj, &ck[k + 1..], &mut cj[k + 1..]);
                    }
                }
            }
            kb = kend;
        }
        Ok(Self { lu: a, piv })
    }

    pub fn dim(&self) -> usize {
        self.lu.nrows
    }

    pub fn solve_in_place(&self, b: &mut [f64]) {
        let n = self.dim();
        assert_eq!(b.len(), n);
        for k in 0..n {
            b.swap(k, self.piv[k]);
        }
        for k in 0..n {
            let bk = b[k];
            if bk != 0.0 {
                axpy(bk, &self.lu.col(k)[k + 1..], &mut b[k + 1..]);
            }
        }
        for k in (0..n).rev() {
            let c = self.lu.col(k);
            b[k] /= c[k];
            let bk = b[k];
            if bk != 0.0 {
                axpy(bk, &c[..k], &mut b[..k]);
            }
        }
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }

    /// Solve `A^T x = b`.
    pub fn solve_transpose(&self, b: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let mut z = b.to_vec();
        for k in 0..n {
            let c = self.lu.col(k);
            z[k] = (z[k] - dot(&c[..k], &z[..k])) / c[k];
        }
        for k in (0..n).rev() {
            let c = self.lu.col(k);
            z[k] -= dot(&c[k + 1..], &z[k + 1..]);
        }
        for k in (0..n).rev() {
            z.swap(k, self.piv[k]);
        }
        z
    }
}

/// Householder QR, `A = Q R`, with Q stored as reflectors below the diagonal.
#[derive(Clone, Debug)]
pub struct Qr {
    qr: Mat,
    tau: Vec<f64>,
}

impl Qr {
    /// Factorize a square matrix; fails when `|R_kk|` falls below
    /// `n * eps * max |R_ii|`.
    pub fn factor(mut a: Mat) -> Result<Self> {
        let n = a.nrows;
        if n != a.ncols {
            return Err(Error::Factorization("QR of a non-square matrix".into()));
        }
        let mut tau = vec![0.0; n];
        for k in 0..n {
            let col = a.col_mut(k);
            let x0 = col[k];
            let xnorm = norm2(&col[k + 1..]);
            if xnorm == 0.0 {
                tau[k] = 0.0;
            } else {
                let beta = -libm::copysign(libm::hypot(x0, xnorm), x0);
                tau[k] = (beta - x0) / beta;
                let s = 1.0 / (x0 - beta);
                col[k + 1..].iter_mut().for_each(|v| *v *= s);
                col[k] = beta;
            }
            let t = tau[k];
            if t == 0.0 {
                continue;
            }
            for j in k + 1..n {
                let (ck, cj) = a.col_pair(k, j);
                let s = t * (cj[k] + dot(&ck[k + 1..], &cj[k + 1..]));
                if s != 0.0 {
                    cj[k] -= s;
                    axpy(s, &ck[k + 1..], &mut cj[k + 1..]);
                }
            }
        }
        let rmax = (0..n).fold(0.0f64, |m, i| m.max(a[(i, i)].abs()));
        if !rmax.is_finite() || (n > 0 && rmax == 0.0) {
            return Err(Error::Factorization("QR of a zero or non-finite matrix".into()));
        }
        let tol = rmax * f64::EPSILON * n as f64;
        for i in 0..n {
            if a[(i, i)].abs() <= tol {
                return Err(Error::Factorization(alloc::format!(
                    "numerically rank-deficient matrix: |R[{i},{i}]| = {:e}",
                    a[(i, i)].abs()
                )));
            }
        }
        Ok(Self { qr: a, tau })
    }

    pub fn dim(&self) -> usize {
        self.qr.nrows
    }

    /// `b <- Q^T b`.
    pub fn apply_qt(&self, b: &mut [f64]) {
        let n = self.dim();
        for k in 0..n {
            let t = self.tau[k];
            if t == 0.0 {
                continue;
            }
            let v = &self.qr.col(k)[k + 1..];
            let s = t * (b[k] + dot(v, &b[k + 1..]));
            b[k] -= s;
            axpy(s, v, &mut b[k + 1..]);
        }
    }

    /// `b <- Q b`.
    pub fn apply_q(&self, b: &mut [f64]) {
        let n = self.dim();
        for k in (0..n).rev() {
            let t = self.tau[k];
            if t == 0.0 {
                continue;
            }
            let v = &self.qr.col(k)[k + 1..];
            let s = t * (b[k] + dot(v, &b[k + 1..]));
            b[k] -= s;
            axpy(s, v, &mut b[k + 1..]);
        }
    }

    /// `R x = Q^T b`, in place.
    pub fn solve_in_place(&self, b: &mut [f64]) {
        self.apply_qt(b);
        for k in (0..self.dim()).rev() {
            let c = self.qr.col(k);
            b[k] /= c[k];
            let bk = b[k];
            if bk != 0.0 {
                axpy(bk, &c[..k], &mut b[..k]);
            }
        }
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }

    /// Solve `A^T x = b` (`R^T z = b`, then `x = Q z`).
    pub fn solve_transpose(&self, b: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let mut z = b.to_vec();
        for k in 0..n {
            let c = self.qr.col(k);
            z[k] = (z[k] - dot(&c[..k], &z[..k])) / c[k];
        }
        self.apply_q(&mut z);
        z
    }
}

/// Cholesky factor of a symmetric positive definite matrix. Keeps the original
/// matrix so that solves can be refined with a compensated residual, which
/// recovers full working accuracy for condition numbers well past `1e12`.
#[derive(Clone, Debug)]
pub struct Cholesky {
    a: Mat,
    l: Mat,
}

impl Cholesky {
    pub fn factor(a: Mat) -> Result<Self> {
        let n = a.nrows;
        if n != a.ncols {
            return Err(Error::Factorization("Cholesky of a non-square matrix".into()));
        }
        let mut l = Mat::zeros(n, n);
        for j in 0..n {
            let mut d = a[(j, j)];
            for k in 0..j {
                d -= l[(j, k)] * l[(j, k)];
            }
            if d.partial_cmp(&0.0) != Some(core::cmp::Ordering::Greater) {
                return Err(Error::Factorization(alloc::format!(
                    "matrix not positive definite at column {j}"
                )));
            }
            let djj = d.sqrt();
            l[(j, j)] = djj;
            for i in j + 1..n {
                let mut s = a[(i, j)];
                for k in 0..j {
                    s -= l[(i, k)] * l[(j, k)];
                }
                l[(i, j)] = s / djj;
            }
        }
        Ok(Self { a, l })
    }

    pub fn dim(&self) -> usize {
        self.l.nrows
    }

    pub fn matrix(&self) -> &Mat {
        &self.a
    }

    fn plain_solve_in_place(&self, b: &mut [f64]) {
        let n = self.dim();
        for k in 0..n {
            let c = self.l.col(k);
            b[k] /= c[k];
            let bk = b[k];
            axpy(bk, &c[k + 1..], &mut b[k + 1..]);
        }
        for k in (0..n).rev() {
            let c = self.l.col(k);
            b[k] = (b[k] - dot(&c[k + 1..], &b[k + 1..])) / c[k];
        }
    }

    /// Unrefined solve.
    pub fn solve_plain(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.plain_solve_in_place(&mut x);
        x
    }

    /// Solve with up to `max_refine` rounds of refinement; the residual is
    /// accumulated with [`dot2`].
    pub fn solve_refined(&self, b: &[f64], max_refine: usize) -> Vec<f64> {
        let n = self.dim();
        let mut x = self.solve_plain(b);
        let mut terms_a = vec![0.0; n + 1];
        let mut terms_b = vec![0.0; n + 1];
        let mut r = vec![0.0; n];
        for _ in 0..max_refine {
            for i in 0..n {
                terms_a[0] = b[i];
                terms_b[0] = 1.0;
                for j in 0..n {
                    terms_a[j + 1] = self.a[(i, j)];
                    terms_b[j + 1] = -x[j];
                }
                r[i] = dot2(&terms_a, &terms_b);
            }
            self.plain_solve_in_place(&mut r);
            let dx = norm2(&r);
            for (xi, ri) in x.iter_mut().zip(&r) {
                *xi += ri;
            }
            if dx <= 4.0 * f64::EPSILON * norm2(&x) {
                break;
            }
        }
        x
    }
}

/// Eigenvalues of a small symmetric matrix by the cyclic Jacobi method,
/// returned in ascending order.
pub fn symmetric_eigenvalues(a: &Mat) -> Vec<f64> {
    let n = a.nrows;
    assert_eq!(n, a.ncols);
    let mut m = a.clone();
    let total: f64 = m.data.iter().map(|v| v * v).sum::<f64>().sqrt();
    for _sweep in 0..100 {
        let mut off = 0.0;
        for j in 0..n {
            for i in 0..n {
                if i != j {
                    off += m[(i, j)] * m[(i, j)];
                }
            }
        }
        if off.sqrt() <= 1e-15 * total {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (m[(q, q)] - m[(p, p)]) / (2.0 * apq);
                let t = libm::copysign(1.0, theta) / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = m[(k, p)];
                    let akq = m[(k, q)];
                    m[(k, p)] = c * akp - s * akq;
                    m[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = m[(p, k)];
                    let aqk = m[(q, k)];
                    m[(p, k)] = c * apk - s * aqk;
                    m[(q, k)] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| m[(i, i)]).collect();
    ev.sort_by(|a, b| a.total_cmp(b));
    ev
}
