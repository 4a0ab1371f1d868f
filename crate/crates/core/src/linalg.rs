//! Cholesky factorizations of the precision matrix used for sampling.
//!
//! Small systems use a dense factor. Larger ones are reordered with reverse
//! Cuthill-McKee and factored in envelope (skyline) storage, which keeps the
//! fill inside the profile of the reordered matrix; for planar neighbourhood
//! graphs that profile grows like `p^{3/2}`.

use std::collections::VecDeque;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Symmetric matrix with unit-free diagonal and sparse off-diagonal rows.
pub trait SymmetricSparse {
    fn dim(&self) -> usize;
    fn diagonal(&self, i: usize) -> f64;
    /// Off-diagonal entries of row `i` as `(column, value)`.
    fn row(&self, i: usize) -> &[(usize, f64)];
}

/// Reverse Cuthill-McKee ordering; returns `perm` with `perm[new] = old`.
pub fn reverse_cuthill_mckee<M: SymmetricSparse + ?Sized>(m: &M) -> Vec<usize> {
    let n = m.dim();
    let degree: Vec<usize> = (0..n).map(|i| m.row(i).len()).collect();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut by_degree: Vec<usize> = (0..n).collect();
    by_degree.sort_by_key(|&i| (degree[i], i));
    for &seed in &by_degree {
        if visited[seed] {
            continue;
        }
        let start = pseudo_peripheral(m, seed, &degree);
        visited[start] = true;
        let mut queue = VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut next: Vec<usize> = m.row(v).iter().map(|&(c, _)| c).filter(|&c| !visited[c]).collect();
            next.sort_by_key(|&c| (degree[c], c));
            for c in next {
                if !visited[c] {
                    visited[c] = true;
                    queue.push_back(c);
                }
            }
        }
    }
    order.reverse();
    order
}

/// Breadth-first levels from `root`: (eccentricity, last level).
fn bfs_levels<M: SymmetricSparse + ?Sized>(m: &M, root: usize) -> (usize, Vec<usize>) {
    let mut dist = std::collections::HashMap::new();
    dist.insert(root, 0usize);
    let mut frontier = vec![root];
    let mut depth = 0;
    loop {
        let mut next = Vec::new();
        for &v in &frontier {
            for &(c, _) in m.row(v) {
                if let std::collections::hash_map::Entry::Vacant(e) = dist.entry(c) {
                    e.insert(depth + 1);
                    next.push(c);
                }
            }
        }
        if next.is_empty() {
            return (depth, frontier);
        }
        depth += 1;
        frontier = next;
    }
}

fn pseudo_peripheral<M: SymmetricSparse + ?Sized>(m: &M, seed: usize, degree: &[usize]) -> usize {
    let mut root = seed;
    let (mut ecc, mut last) = bfs_levels(m, root);
    for _ in 0..8 {
        let cand = *last.iter().min_by_key(|&&v| (degree[v], v)).unwrap();
        let (e, l) = bfs_levels(m, cand);
        if e <= ecc {
            break;
        }
        root = cand;
        ecc = e;
        last = l;
    }
    root
}

/// Lower Cholesky factor of a permuted sparse matrix in envelope storage.
#[derive(Clone, Debug)]
pub struct EnvelopeCholesky {
    perm: Vec<usize>,
    first: Vec<usize>,
    start: Vec<usize>,
    vals: Vec<f64>,
}

impl EnvelopeCholesky {
    pub fn factor<M: SymmetricSparse + ?Sized>(m: &M) -> Result<Self> {
        let perm = reverse_cuthill_mckee(m);
        Self::factor_with(m, perm)
    }

    pub fn factor_with<M: SymmetricSparse + ?Sized>(m: &M, perm: Vec<usize>) -> Result<Self> {
        let n = m.dim();
        let mut inv = vec![0usize; n];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }
        let mut first = vec![0usize; n];
        let mut start = vec![0usize; n + 1];
        for i in 0..n {
            first[i] = m.row(perm[i]).iter().map(|&(c, _)| inv[c]).filter(|&c| c < i).min().unwrap_or(i);
            start[i + 1] = start[i] + (i - first[i] + 1);
        }
        let mut vals = vec![0.0; start[n]];
        for i in 0..n {
            let old = perm[i];
            vals[start[i] + (i - first[i])] = m.diagonal(old);
            for &(c, v) in m.row(old) {
                let j = inv[c];
                if j < i {
                    vals[start[i] + (j - first[i])] = v;
                }
            }
        }
        for i in 0..n {
            let fi = first[i];
            for j in fi..=i {
                let fj = first[j];
                let k0 = fi.max(fj);
                let row_i = &vals[start[i] + (k0 - fi)..start[i] + (j - fi)];
                let row_j = &vals[start[j] + (k0 - fj)..start[j] + (j - fj)];
                let dot: f64 = row_i.iter().zip(row_j).map(|(a, b)| a * b).sum();
                let idx = start[i] + (j - fi);
                let s = vals[idx] - dot;
                if j == i {
                    if !(s > 0.0) {
                        return Err(Error::NotPositiveDefinite);
                    }
                    vals[idx] = s.sqrt();
                } else {
                    vals[idx] = s / vals[start[j] + (j - fj)];
                }
            }
        }
        Ok(Self { perm, first, start, vals })
    }

    pub fn dim(&self) -> usize {
        self.perm.len()
    }

    /// Number of stored factor entries.
    pub fn envelope_size(&self) -> usize {
        self.vals.len()
    }

    /// Solves `L^T y = z` in factor order and scatters `y` to original order in `out`.
    /// `z` is overwritten.
    pub fn solve_transpose(&self, z: &mut [f64], out: &mut [f64]) {
        let n = self.dim();
        for i in (0..n).rev() {
            let fi = self.first[i];
            let row = &self.vals[self.start[i]..self.start[i + 1]];
            let yi = z[i] / row[i - fi];
            z[i] = yi;
            for (k, &l) in row[..i - fi].iter().enumerate() {
                z[fi + k] -= l * yi;
            }
        }
        for (new, &old) in self.perm.iter().enumerate() {
            out[old] = z[new];
        }
    }

    /// Dense copy of `L` in factor order, for tests.
    pub fn to_dense(&self) -> (DMatrix<f64>, Vec<usize>) {
        let n = self.dim();
        let mut l = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in self.first[i]..=i {
                l[(i, j)] = self.vals[self.start[i] + (j - self.first[i])];
            }
        }
        (l, self.perm.clone())
    }
}

/// Dense lower Cholesky factor.
#[derive(Clone, Debug)]
pub struct DenseCholesky {
    l: DMatrix<f64>,
}

impl DenseCholesky {
    pub fn factor(a: DMatrix<f64>) -> Result<Self> {
        let chol = nalgebra::Cholesky::new(a).ok_or(Error::NotPositiveDefinite)?;
        Ok(Self { l: chol.unpack() })
    }

    pub fn dim(&self) -> usize {
        self.l.nrows()
    }

    /// Solves `L^T x = z` in place.
    pub fn solve_transpose(&self, z: &mut [f64]) {
        let n = self.dim();
        for i in (0..n).rev() {
            let col = self.l.column(i);
            let mut s = z[i];
            for k in i + 1..n {
                s -= col[k] * z[k];
            }
            z[i] = s / col[i];
        }
    }
}

/// Factor used by the sampler.
#[derive(Clone, Debug)]
pub enum Factor {
    Dense(DenseCholesky),
    Envelope(EnvelopeCholesky),
}

/// How to factor the precision matrix.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FactorStrategy {
    /// Dense up to the given dimension, envelope above it.
    Auto {
        dense_max: usize,
    },
    Dense,
    Envelope,
}

impl Default for FactorStrategy {
    fn default() -> Self {
        FactorStrategy::Auto { dense_max: 200 }
    }
}

impl Factor {
    pub fn new<M: SymmetricSparse + ?Sized>(m: &M, strategy: FactorStrategy) -> Result<Self> {
        let dense = match strategy {
            FactorStrategy::Auto { dense_max } => m.dim() <= dense_max,
            FactorStrategy::Dense => true,
            FactorStrategy::Envelope => false,
        };
        if dense {
            Ok(Factor::Dense(DenseCholesky::factor(to_dense(m))?))
        } else {
            Ok(Factor::Envelope(EnvelopeCholesky::factor(m)?))
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Factor::Dense(f) => f.dim(),
            Factor::Envelope(f) => f.dim(),
        }
    }

    /// Maps a standard normal vector `z` to a draw `x` with covariance `A^{-1}`.
    /// `z` is used as scratch space.
    pub fn transform(&self, z: &mut [f64], out: &mut [f64]) {
        match self {
            Factor::Dense(f) => {
                f.solve_transpose(z);
                out.copy_from_slice(z);
            }
            Factor::Envelope(f) => f.solve_transpose(z, out),
        }
    }
}

pub fn to_dense<M: SymmetricSparse + ?Sized>(m: &M) -> DMatrix<f64> {
    let n = m.dim();
    let mut a = DMatrix::zeros(n, n);
    for i in 0..n {
        a[(i, i)] = m.diagonal(i);
        for &(c, v) in m.row(i) {
            a[(i, c)] = v;
        }
    }
    a
}
