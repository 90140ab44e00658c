//! Reverse Cuthill-McKee ordering and banded LU with partial pivoting
//! (LAPACK `gbtf2`/`gbtrs` storage and algorithm).

use alloc::collections::VecDeque;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::sparse::CsrMatrix;
use crate::{Error, Result};

/// Reverse Cuthill-McKee permutation: `perm[new] = old`.
pub fn rcm_order(adj: &[Vec<usize>]) -> Vec<usize> {
    let n = adj.len();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut by_degree: Vec<usize> = (0..n).collect();
    by_degree.sort_by_key(|&i| (adj[i].len(), i));
    for &seed in &by_degree {
        if visited[seed] {
            continue;
        }
        let start = peripheral(adj, seed);
        let mut queue = VecDeque::new();
        visited[start] = true;
        queue.push_back(start);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut nb: Vec<usize> = adj[v].iter().copied().filter(|&w| !visited[w]).collect();
            nb.sort_by_key(|&w| (adj[w].len(), w));
            for w in nb {
                visited[w] = true;
                queue.push_back(w);
            }
        }
    }
    order.reverse();
    order
}

/// Pseudo-peripheral node of the component of `seed` (repeated BFS to the
/// farthest minimum-degree node).
fn peripheral(adj: &[Vec<usize>], seed: usize) -> usize {
    let mut node = seed;
    let mut ecc = 0;
    for _ in 0..8 {
        let (far, depth) = bfs_far(adj, node);
        if depth <= ecc {
            break;
        }
        ecc = depth;
        node = far;
    }
    node
}

fn bfs_far(adj: &[Vec<usize>], start: usize) -> (usize, usize) {
    let mut level = vec![usize::MAX; adj.len()];
    let mut queue = VecDeque::new();
    level[start] = 0;
    queue.push_back(start);
    let mut last = start;
    while let Some(v) = queue.pop_front() {
        last = v;
        for &w in &adj[v] {
            if level[w] == usize::MAX {
                level[w] = level[v] + 1;
                queue.push_back(w);
            }
        }
    }
    let depth = level[last];
    let far = (0..adj.len())
        .filter(|&i| level[i] == depth)
        .min_by_key(|&i| (adj[i].len(), i))
        .unwrap_or(last);
    (far, depth)
}

/// LU factors of a band matrix, column-major band storage with leading
/// dimension `2 kl + ku + 1`.
#[derive(Clone, Debug)]
pub struct BandLu {
    n: usize,
    kl: usize,
    ku: usize,
    ab: Vec<f64>,
    ipiv: Vec<usize>,
}

impl BandLu {
    pub fn factor(a: &CsrMatrix) -> Result<Self> {
        let n = a.nrows();
        let (mut kl, mut ku) = (0, 0);
        for (i, j, _) in a.iter() {
            if i > j {
                kl = kl.max(i - j);
            } else {
                ku = ku.max(j - i);
            }
        }
        let kv = kl + ku;
        let ld = 2 * kl + ku + 1;
        let mut ab = vec![0.0; ld * n];
        let mut scale = 0.0f64;
        for (i, j, v) in a.iter() {
            ab[kv + i - j + j * ld] += v;
            scale = scale.max(v.abs());
        }
        let tiny = n as f64 * f64::EPSILON * scale;
        let mut ipiv = vec![0; n];
        let mut ju = 0usize;
        for j in 0..n {
            let km = kl.min(n - 1 - j);
            let col = j * ld;
            let mut jp = 0;
            let mut best = ab[kv + col].abs();
            for i in 1..=km {
                let v = ab[kv + i + col].abs();
                if v > best {
                    best = v;
                    jp = i;
                }
            }
            ipiv[j] = j + jp;
            if !(best > tiny) {
                return Err(Error::Factorization(format!(
                    "band LU: zero pivot in column {j} of {n}"
                )));
            }
            ju = ju.max((j + ku + jp).min(n - 1));
            if jp != 0 {
                for c in j..=ju {
                    let base = c * ld + kv;
                    ab.swap(base + j + jp - c, base + j - c);
                }
            }
            let pivot = ab[kv + col];
            for i in 1..=km {
                ab[kv + i + col] /= pivot;
            }
            for c in j + 1..=ju {
                let t = ab[kv + j - c + c * ld];
                if t == 0.0 {
                    continue;
                }
                for i in 1..=km {
                    let l = ab[kv + i + col];
                    ab[kv + j + i - c + c * ld] -= l * t;
                }
            }
        }
        Ok(Self { n, kl, ku, ab, ipiv })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn bandwidths(&self) -> (usize, usize) {
        (self.kl, self.ku)
    }

    pub fn solve_in_place(&self, b: &mut [f64]) {
        let (n, kl, kv) = (self.n, self.kl, self.kl + self.ku);
        let ld = 2 * self.kl + self.ku + 1;
        for j in 0..n {
            let jp = self.ipiv[j];
            if jp != j {
                b.swap(j, jp);
            }
            let bj = b[j];
            if bj != 0.0 {
                for i in 1..=kl.min(n - 1 - j) {
                    b[j + i] -= self.ab[kv + i + j * ld] * bj;
                }
            }
        }
        for j in (0..n).rev() {
            b[j] /= self.ab[kv + j * ld];
            let bj = b[j];
            if bj != 0.0 {
                for i in j.saturating_sub(kv)..j {
                    b[i] -= self.ab[kv + i - j + j * ld] * bj;
                }
            }
        }
    }
}
