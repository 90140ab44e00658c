use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::geometry::Point;
use crate::sparse::CsrMatrix;
use crate::{Error, Result};

/// Nonoverlapping cores and their one-layer overlapping extensions. Index
/// lists are sorted.
#[derive(Clone, Debug, PartialEq)]
pub struct Partition {
    pub cores: Vec<Vec<usize>>,
    pub parts: Vec<Vec<usize>>,
}

impl Partition {
    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    /// `count[i]` = number of overlapping parts containing `i`.
    pub fn multiplicity(&self, n: usize) -> Vec<usize> {
        let mut count = vec![0; n];
        for part in &self.parts {
            for &i in part {
                count[i] += 1;
            }
        }
        count
    }
}

/// Recursive coordinate bisection into `p` cores (rounded up to a power of
/// two, empty cores dropped), each grown by one layer of the adjacency of
/// `C + C^T`.
pub fn partition_graph(c: &CsrMatrix, coords: &[Point], p: usize) -> Result<Partition> {
    let n = c.nrows();
    if c.ncols() != n {
        return Err(Error::Config(format!("partition: matrix is {}x{}", n, c.ncols())));
    }
    if coords.len() != n {
        return Err(Error::Config(format!("partition: {} coordinates for {n} rows", coords.len())));
    }
    if p == 0 || p > n {
        return Err(Error::Config(format!("partition: P = {p} must lie in 1..={n}")));
    }
    let levels = p.next_power_of_two().trailing_zeros();
    let mut cores = Vec::new();
    bisect((0..n).collect(), coords, levels, &mut cores);
    cores.retain(|c| !c.is_empty());
    for core in &mut cores {
        core.sort_unstable();
    }

    let adj = c.symmetric_adjacency();
    let mut mark = vec![usize::MAX; n];
    let parts = cores
        .iter()
        .enumerate()
        .map(|(q, core)| {
            let mut part = core.clone();
            for &i in core {
                mark[i] = q;
            }
            for &i in core {
                for &j in &adj[i] {
                    if mark[j] != q {
                        mark[j] = q;
                        part.push(j);
                    }
                }
            }
            part.sort_unstable();
            part
        })
        .collect();
    Ok(Partition { cores, parts })
}

fn bisect(mut idx: Vec<usize>, coords: &[Point], levels: u32, out: &mut Vec<Vec<usize>>) {
    if levels == 0 {
        out.push(idx);
        return;
    }
    let (mut lo, mut hi) = (Point { x: f64::INFINITY, y: f64::INFINITY }, Point { x: f64::NEG_INFINITY, y: f64::NEG_INFINITY });
    for &i in &idx {
        let q = coords[i];
        lo = Point::new(lo.x.min(q.x), lo.y.min(q.y));
        hi = Point::new(hi.x.max(q.x), hi.y.max(q.y));
    }
    let along_x = idx.is_empty() || hi.x - lo.x >= hi.y - lo.y;
    let key = |i: usize| {
        let q = coords[i];
        if along_x { (q.x, q.y) } else { (q.y, q.x) }
    };
    idx.sort_by(|&a, &b| key(a).partial_cmp(&key(b)).unwrap_or(core::cmp::Ordering::Equal).then(a.cmp(&b)));
    let right = idx.split_off(idx.len().div_ceil(2));
    bisect(idx, coords, levels - 1, out);
    bisect(right, coords, levels - 1, out);
}
