//! Sparse assembly targets and the banded direct solver used by Newton.
//!
//! The global tangent is assembled element by element through
//! [`HessianSink`]. For solves, free DOFs are renumbered with reverse
//! Cuthill-McKee so that the rod/coupling stencils fall into a narrow band,
//! then factored with a banded LU using partial pivoting.

use alloc::collections::BTreeMap;
use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Result, SimError};

/// Receiver for second-derivative contributions.
pub trait HessianSink {
    fn add(&mut self, row: usize, col: usize, value: f64);
}

/// Order-preserving sparse matrix, used for inspection and tests.
#[derive(Clone, Debug, Default)]
pub struct SparseMatrix {
    pub dim: usize,
    pub entries: BTreeMap<(usize, usize), f64>,
}

impl SparseMatrix {
    pub fn new(dim: usize) -> Self {
        Self { dim, entries: BTreeMap::new() }
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.entries.get(&(row, col)).copied().unwrap_or(0.0)
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.values().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Largest `|H_ij - H_ji|`.
    pub fn max_asymmetry(&self) -> f64 {
        self.entries.iter().map(|(&(r, c), v)| (v - self.get(c, r)).abs()).fold(0.0, f64::max)
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.dim]; self.dim];
        for (&(r, c), v) in &self.entries {
            d[r][c] += v;
        }
        d
    }

    /// Maximum number of distinct columns any row touches.
    pub fn max_row_nnz(&self) -> usize {
        let mut counts = vec![0usize; self.dim];
        for (&(r, _), v) in &self.entries {
            if *v != 0.0 {
                counts[r] += 1;
            }
        }
        counts.into_iter().max().unwrap_or(0)
    }
}

impl HessianSink for SparseMatrix {
    fn add(&mut self, row: usize, col: usize, value: f64) {
        *self.entries.entry((row, col)).or_insert(0.0) += value;
    }
}

/// Sink that discards everything; used when only gradients are wanted.
pub struct NullSink;

impl HessianSink for NullSink {
    #[inline]
    fn add(&mut self, _: usize, _: usize, _: f64) {}
}

/// Reverse Cuthill-McKee ordering of an undirected graph given as adjacency
/// lists. Returns `perm` with `perm[old] = new`.
pub fn reverse_cuthill_mckee(adjacency: &[Vec<usize>]) -> Vec<usize> {
    let n = adjacency.len();
    let degree: Vec<usize> = adjacency.iter().map(Vec::len).collect();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut queue = VecDeque::new();

    while order.len() < n {
        // Start each component from its lowest-degree unvisited vertex.
        let start = (0..n).filter(|&i| !visited[i]).min_by_key(|&i| (degree[i], i)).unwrap();
        let start = pseudo_peripheral(adjacency, start, &visited);
        visited[start] = true;
        queue.push_back(start);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut next: Vec<usize> = adjacency[v].iter().copied().filter(|&w| !visited[w]).collect();
            next.sort_by_key(|&w| (degree[w], w));
            for w in next {
                if !visited[w] {
                    visited[w] = true;
                    queue.push_back(w);
                }
            }
        }
    }

    let mut perm = vec![0; n];
    for (new, &old) in order.iter().rev().enumerate() {
        perm[old] = new;
    }
    perm
}

/// Repeated BFS toward the farthest, lowest-degree vertex.
fn pseudo_peripheral(adjacency: &[Vec<usize>], start: usize, blocked: &[bool]) -> usize {
    let n = adjacency.len();
    let mut root = start;
    let mut best_ecc = 0;
    for _ in 0..8 {
        let mut dist = vec![usize::MAX; n];
        dist[root] = 0;
        let mut queue = VecDeque::from([root]);
        let mut far = root;
        while let Some(v) = queue.pop_front() {
            for &w in &adjacency[v] {
                if !blocked[w] && dist[w] == usize::MAX {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                    if dist[w] > dist[far] || (dist[w] == dist[far] && adjacency[w].len() < adjacency[far].len()) {
                        far = w;
                    }
                }
            }
        }
        if dist[far] <= best_ecc && root != start {
            break;
        }
        best_ecc = dist[far];
        if far == root {
            break;
        }
        root = far;
    }
    root
}

/// General banded matrix with room for LU fill-in from partial pivoting.
///
/// Entry `(i, j)` is stored at `data[j * ld + kl + ku + i - j]`, LAPACK
/// `gbtrf` layout.
#[derive(Clone, Debug)]
pub struct BandMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    ld: usize,
    data: Vec<f64>,
    pivots: Vec<usize>,
    factored: bool,
}

impl BandMatrix {
    pub fn new(n: usize, kl: usize, ku: usize) -> Self {
        let ld = 2 * kl + ku + 1;
        Self { n, kl, ku, ld, data: vec![0.0; ld * n], pivots: vec![0; n], factored: false }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn bandwidths(&self) -> (usize, usize) {
        (self.kl, self.ku)
    }

    pub fn clear(&mut self) {
        self.data.iter_mut().for_each(|x| *x = 0.0);
        self.factored = false;
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        j * self.ld + self.kl + self.ku + i - j
    }

    /// Adds to `(i, j)`; the entry must lie inside the declared band.
    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(i + self.ku >= j && j + self.kl >= i, "entry ({i},{j}) outside band");
        let k = self.idx(i, j);
        self.data[k] += v;
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        if i + self.ku < j || j + self.kl < i {
            0.0
        } else {
            self.data[self.idx(i, j)]
        }
    }

    /// In-place LU factorization with partial pivoting.
    pub fn factor(&mut self) -> Result<()> {
        let (n, kl, ku) = (self.n, self.kl, self.ku);
        let kv = kl + ku;
        let mut ju = 0usize;
        for j in 0..n {
            let km = kl.min(n - 1 - j);
            let mut jp = 0;
            let mut best = 0.0f64;
            for p in 0..=km {
                let a = self.data[self.idx(j + p, j)].abs();
                if a > best {
                    best = a;
                    jp = p;
                }
            }
            self.pivots[j] = j + jp;
            if best == 0.0 || !best.is_finite() {
                return Err(SimError::SingularMatrix { column: j });
            }
            ju = ju.max((j + ku + jp).min(n - 1));
            if jp != 0 {
                for c in j..=ju {
                    let a = c * self.ld + kv + j - c;
                    let b = c * self.ld + kv + j + jp - c;
                    self.data.swap(a, b);
                }
            }
            if km > 0 {
                let inv = 1.0 / self.data[self.idx(j, j)];
                for p in 1..=km {
                    let k = self.idx(j + p, j);
                    self.data[k] *= inv;
                }
                for c in j + 1..=ju {
                    let a = self.data[self.idx(j, c)];
                    if a != 0.0 {
                        for p in 1..=km {
                            let l = self.data[self.idx(j + p, j)];
                            let k = self.idx(j + p, c);
                            self.data[k] -= l * a;
                        }
                    }
                }
            }
        }
        self.factored = true;
        Ok(())
    }

    /// Solves `A x = b` in place using a prior [`factor`](Self::factor).
    pub fn solve(&self, b: &mut [f64]) {
        assert!(self.factored, "BandMatrix::solve before factor");
        let (n, kl, ku) = (self.n, self.kl, self.ku);
        for j in 0..n {
            let l = self.pivots[j];
            if l != j {
                b.swap(l, j);
            }
            let km = kl.min(n - 1 - j);
            let bj = b[j];
            if bj != 0.0 {
                for p in 1..=km {
                    b[j + p] -= self.data[self.idx(j + p, j)] * bj;
                }
            }
        }
        let kv = kl + ku;
        for j in (0..n).rev() {
            b[j] /= self.data[self.idx(j, j)];
            let bj = b[j];
            if bj != 0.0 {
                for i in j.saturating_sub(kv)..j {
                    b[i] -= self.data[self.idx(i, j)] * bj;
                }
            }
        }
    }
}

/// Routes global `(row, col)` contributions into a [`BandMatrix`] through a
/// permutation; rows or columns mapped to `None` (fixed DOFs) are dropped.
pub struct PermutedBandSink<'a> {
    pub band: &'a mut BandMatrix,
    pub perm: &'a [Option<usize>],
}

impl HessianSink for PermutedBandSink<'_> {
    #[inline]
    fn add(&mut self, row: usize, col: usize, value: f64) {
        if let (Some(r), Some(c)) = (self.perm[row], self.perm[col]) {
            self.band.add(r, c, value);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
        let n = b.len();
        for k in 0..n {
            let p = (k..n).max_by(|&i, &j| a[i][k].abs().partial_cmp(&a[j][k].abs()).unwrap()).unwrap();
            a.swap(k, p);
            b.swap(k, p);
            for i in k + 1..n {
                let f = a[i][k] / a[k][k];
                for j in k..n {
                    a[i][j] -= f * a[k][j];
                }
                b[i] -= f * b[k];
            }
        }
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let s: f64 = (i + 1..n).map(|j| a[i][j] * x[j]).sum();
            x[i] = (b[i] - s) / a[i][i];
        }
        x
    }

    #[test]
    fn banded_lu_matches_dense_with_pivoting() {
        let (n, kl, ku) = (12, 2, 3);
        let mut band = BandMatrix::new(n, kl, ku);
        let mut dense = vec![vec![0.0; n]; n];
        let mut seed = 7u64;
        let mut rnd = || {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((seed >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        for i in 0..n {
            for j in 0..n {
                if i + ku >= j && j + kl >= i {
                    // small diagonal forces pivoting
                    let v = if i == j { 0.01 * rnd() } else { rnd() };
                    band.add(i, j, v);
                    dense[i][j] = v;
                }
            }
        }
        let b: Vec<f64> = (0..n).map(|i| i as f64 - 3.0).collect();
        let expected = dense_solve(dense, b.clone());
        band.factor().unwrap();
        let mut x = b;
        band.solve(&mut x);
        for (a, e) in x.iter().zip(&expected) {
            assert!((a - e).abs() < 1e-9 * (1.0 + e.abs()), "{a} vs {e}");
        }
    }

    #[test]
    fn singular_band_is_reported() {
        let mut band = BandMatrix::new(3, 1, 1);
        band.add(0, 0, 1.0);
        band.add(2, 2, 1.0);
        assert!(matches!(band.factor(), Err(SimError::SingularMatrix { column: 1 })));
    }

    #[test]
    fn rcm_shrinks_ladder_bandwidth() {
        // Two chains of 20 joined rung by rung, numbered chain after chain.
        let n = 40;
        let mut adj = vec![Vec::new(); n];
        let link = |a: usize, b: usize, adj: &mut Vec<Vec<usize>>| {
            adj[a].push(b);
            adj[b].push(a);
        };
        for i in 0..19 {
            link(i, i + 1, &mut adj);
            link(20 + i, 21 + i, &mut adj);
        }
        for i in 0..20 {
            link(i, 20 + i, &mut adj);
        }
        let perm = reverse_cuthill_mckee(&adj);
        let mut seen = perm.clone();
        seen.sort();
        assert_eq!(seen, (0..n).collect::<Vec<_>>());
        let bw = (0..n)
            .flat_map(|a| adj[a].iter().map(move |&b| (a, b)))
            .map(|(a, b)| perm[a].abs_diff(perm[b]))
            .max()
            .unwrap();
        assert!(bw <= 3, "bandwidth {bw}");
    }
}
