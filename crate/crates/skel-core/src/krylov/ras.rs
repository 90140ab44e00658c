use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;

use super::band::{rcm_order, BandLu};
use super::partition::Partition;
use crate::linalg::Lu;
use crate::runner::TaskRunner;
use crate::sparse::CsrMatrix;
use crate::{Error, Result};

/// Parts up to this size are factorized densely; larger ones use RCM and
/// banded LU.
pub const DENSE_LIMIT: usize = 2000;

#[derive(Clone, Debug)]
pub enum LocalFactor {
    Dense(Lu),
    Band(BandLu),
}

impl LocalFactor {
    fn solve_in_place(&self, b: &mut [f64]) {
        match self {
            LocalFactor::Dense(lu) => lu.solve_in_place(b),
            LocalFactor::Band(lu) => lu.solve_in_place(b),
        }
    }

    pub fn is_dense(&self) -> bool {
        matches!(self, LocalFactor::Dense(_))
    }
}

/// One-level RAS preconditioner. `indices[p]` lists the global rows of
/// part `p` in the order used by its factorization; `weights[p]` is the
/// diagonal of `D_p` in the same order.
#[derive(Clone, Debug)]
pub struct RasPreconditioner {
    n: usize,
    pub partition: Partition,
    pub indices: Vec<Vec<usize>>,
    pub weights: Vec<Vec<f64>>,
    pub factors: Vec<LocalFactor>,
}

impl RasPreconditioner {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn parts(&self) -> usize {
        self.indices.len()
    }

    /// `max_i |sum_p (R_p^T D_p R_p)_ii - 1|`, accumulated in part order.
    pub fn partition_of_unity_defect(&self) -> f64 {
        let mut s = vec![0.0; self.n];
        for (idx, w) in self.indices.iter().zip(&self.weights) {
            for (&i, &d) in idx.iter().zip(w) {
                s[i] += d;
            }
        }
        s.iter().map(|v| (v - 1.0).abs()).fold(0.0, f64::max)
    }
}

/// Extract and factorize every `C_p`. Weights are `1/count`, except that
/// the last part holding a row takes the remainder so the weights sum to
/// exactly one in floating point.
pub fn build_ras(c: &CsrMatrix, partition: Partition, runner: &impl TaskRunner) -> Result<RasPreconditioner> {
    let n = c.nrows();
    let count = partition.multiplicity(n);
    if let Some(i) = count.iter().position(|&k| k == 0) {
        return Err(Error::Config(alloc::format!("RAS: row {i} belongs to no part")));
    }

    let built: Vec<Result<(Vec<usize>, LocalFactor)>> = runner.map(partition.len(), |p| {
        let part = &partition.parts[p];
        let fail = |e: Error| Error::Preconditioner { part: p, detail: e.to_string() };
        if part.len() <= DENSE_LIMIT {
            let lu = Lu::factor(c.submatrix(part).to_dense()).map_err(fail)?;
            Ok((part.clone(), LocalFactor::Dense(lu)))
        } else {
            let local = c.submatrix(part);
            let order: Vec<usize> = rcm_order(&local.symmetric_adjacency()).into_iter().map(|k| part[k]).collect();
            let lu = BandLu::factor(&c.submatrix(&order)).map_err(fail)?;
            Ok((order, LocalFactor::Band(lu)))
        }
    });
    let mut indices = Vec::with_capacity(built.len());
    let mut factors = Vec::with_capacity(built.len());
    for b in built {
        let (idx, f) = b?;
        indices.push(idx);
        factors.push(f);
    }

    let mut seen = vec![0usize; n];
    let mut acc = vec![0.0f64; n];
    let weights = indices
        .iter()
        .map(|idx| {
            idx.iter()
                .map(|&i| {
                    seen[i] += 1;
                    let d = if seen[i] == count[i] { 1.0 - acc[i] } else { 1.0 / count[i] as f64 };
                    acc[i] += d;
                    d
                })
                .collect()
        })
        .collect();
    Ok(RasPreconditioner { n, partition, indices, weights, factors })
}

/// `w = sum_p R_p^T D_p C_p^{-1} R_p v`. Local solves go through the
/// runner; the sum is taken in part order.
pub fn apply_ras(m: &RasPreconditioner, v: &[f64], runner: &impl TaskRunner) -> Vec<f64> {
    let locals = runner.map(m.parts(), |p| {
        let mut b: Vec<f64> = m.indices[p].iter().map(|&i| v[i]).collect();
        m.factors[p].solve_in_place(&mut b);
        b
    });
    let mut w = vec![0.0; m.n];
    for ((idx, d), b) in m.indices.iter().zip(&m.weights).zip(locals) {
        for ((&i, &di), bi) in idx.iter().zip(d).zip(b) {
            w[i] += di * bi;
        }
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point;
    use crate::krylov::{dense_solve, partition_graph};
    use crate::runner::Sequential;

    fn grid_system(k: usize) -> (CsrMatrix, Vec<Point>) {
        // nonsymmetric convection-diffusion stencil
        let mut t = Vec::new();
        let mut pts = Vec::new();
        for iy in 0..k {
            for ix in 0..k {
                let i = iy * k + ix;
                pts.push(Point::new(ix as f64, iy as f64));
                t.push((i, i, 4.5));
                if ix > 0 {
                    t.push((i, i - 1, -1.3));
                }
                if ix + 1 < k {
                    t.push((i, i + 1, -0.7));
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

    #[test]
    fn identity_matrix_gives_identity_preconditioner() {
        let c = CsrMatrix::identity(30);
        let pts: Vec<Point> = (0..30).map(|i| Point::new((i % 6) as f64, (i / 6) as f64)).collect();
        let m = build_ras(&c, partition_graph(&c, &pts, 4).unwrap(), &Sequential).unwrap();
        let v: Vec<f64> = (0..30).map(|i| i as f64 - 3.5).collect();
        assert_eq!(apply_ras(&m, &v, &Sequential), v);
    }

    #[test]
    fn one_part_is_the_exact_inverse() {
        let (c, pts) = grid_system(9);
        let m = build_ras(&c, partition_graph(&c, &pts, 1).unwrap(), &Sequential).unwrap();
        let v: Vec<f64> = (0..81).map(|i| (i as f64).sin()).collect();
        let w = apply_ras(&m, &v, &Sequential);
        let u = dense_solve(&c, &v).unwrap();
        for (a, b) in w.iter().zip(&u) {
            assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn block_diagonal_with_block_parts_is_exact() {
        let c = CsrMatrix::from_triplets(4, 4, &[(0, 0, 2.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, 3.0), (2, 2, 4.0), (2, 3, -1.0), (3, 2, 2.0), (3, 3, 5.0)]).unwrap();
        let partition = Partition { cores: vec![vec![0, 1], vec![2, 3]], parts: vec![vec![0, 1], vec![2, 3]] };
        let m = build_ras(&c, partition, &Sequential).unwrap();
        let v = [1.0, 2.0, 3.0, 4.0];
        let w = apply_ras(&m, &v, &Sequential);
        // [[2,1],[1,3]]^{-1}(1,2) = (0.2, 0.6); [[4,-1],[2,5]]^{-1}(3,4) = (19/22, 5/11)
        let expect = [0.2, 0.6, 19.0 / 22.0, 5.0 / 11.0];
        for (a, b) in w.iter().zip(&expect) {
            assert!((a - b).abs() <= 1e-15);
        }
    }

    #[test]
    fn partition_of_unity_is_exact_and_apply_is_linear() {
        let (c, pts) = grid_system(12);
        for p in [1, 2, 4, 8, 16] {
            let m = build_ras(&c, partition_graph(&c, &pts, p).unwrap(), &Sequential).unwrap();
            assert_eq!(m.partition_of_unity_defect(), 0.0, "P = {p}");
            let v1: Vec<f64> = (0..144).map(|i| (i as f64 * 0.7).cos()).collect();
            let v2: Vec<f64> = (0..144).map(|i| (i as f64 * 0.2).sin()).collect();
            let alpha = -1.7;
            let mix: Vec<f64> = v1.iter().zip(&v2).map(|(a, b)| alpha * a + b).collect();
            let (w1, w2, wm) = (apply_ras(&m, &v1, &Sequential), apply_ras(&m, &v2, &Sequential), apply_ras(&m, &mix, &Sequential));
            for i in 0..144 {
                assert!((wm[i] - (alpha * w1[i] + w2[i])).abs() <= 1e-13);
            }
        }
    }

    #[test]
    fn band_path_matches_dense_path() {
        let (c, pts) = grid_system(46);
        let m = build_ras(&c, partition_graph(&c, &pts, 1).unwrap(), &Sequential).unwrap();
        assert!(!m.factors[0].is_dense());
        let v: Vec<f64> = (0..c.nrows()).map(|i| ((i * 37) % 101) as f64 / 101.0).collect();
        let w = apply_ras(&m, &v, &Sequential);
        let u = dense_solve(&c, &v).unwrap();
        for (a, b) in w.iter().zip(&u) {
            assert!((a - b).abs() <= 1e-11);
        }
    }

    #[test]
    fn singular_block_names_its_part() {
        let c = CsrMatrix::from_triplets(4, 4, &[(0, 0, 1.0), (1, 1, 1.0), (2, 2, 1.0)]).unwrap();
        let partition = Partition { cores: vec![vec![0, 1], vec![2, 3]], parts: vec![vec![0, 1], vec![2, 3]] };
        assert!(matches!(build_ras(&c, partition, &Sequential), Err(Error::Preconditioner { part: 1, .. })));
    }
}
