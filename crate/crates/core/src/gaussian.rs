//! Sampling from `N(0, J^{-1})`, restricted sample traces and the symmetrized KL.
//!
//! Row `r` of a sample matrix is drawn from its own ChaCha stream
//! `(seed, stream = r)`, so rows can be generated in parallel and any subset of
//! rows can be regenerated independently.

use std::io::{Read, Write};

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::graphgen::PrecisionModel;
use crate::linalg::Factor;

const MAGIC: &[u8; 8] = b"GMRFSMP1";

/// Source of restricted sample traces `Tr(Sigma_hat_A)`.
pub trait TraceSource: Sync {
    /// Number of samples `n`.
    fn sample_count(&self) -> usize;
    /// Number of variables `p`.
    fn dim(&self) -> usize;
    /// `(1/n) sum_i |x_{A,i}|^2` over the vertex subset `A`.
    fn restricted_trace(&self, subset: &[usize]) -> Result<f64>;
}

/// `n x p` matrix of i.i.d. draws, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleMatrix {
    n: usize,
    p: usize,
    seed: u64,
    data: Vec<f64>,
}

fn row_rng(seed: u64, row: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(row as u64);
    rng
}

fn draw_row(factor: &Factor, seed: u64, row: usize, scratch: &mut [f64], out: &mut [f64]) {
    let mut rng = row_rng(seed, row);
    for z in scratch.iter_mut() {
        *z = StandardNormal.sample(&mut rng);
    }
    factor.transform(scratch, out);
}

/// Draws `n` samples from `N(0, J^{-1})`.
pub fn sample(precision: &PrecisionModel, n: usize, seed: u64) -> SampleMatrix {
    let p = precision.p();
    let factor = precision.factor();
    let mut data = vec![0.0; n * p];
    if p > 0 {
        data.par_chunks_mut(p)
            .enumerate()
            .for_each_init(|| vec![0.0; p], |scratch, (r, row)| draw_row(factor, seed, r, scratch, row));
    }
    SampleMatrix { n, p, seed, data }
}

/// Per-vertex second moments `(1/n) sum_i x_{ij}^2` of the draws `sample` would
/// produce, computed in blocks without storing the matrix.
///
/// The result is bit-identical to `sample(..).second_moments()`.
pub fn sample_second_moments(precision: &PrecisionModel, n: usize, seed: u64) -> VertexMoments {
    const BLOCK: usize = 256;
    let p = precision.p();
    let factor = precision.factor();
    let mut sums = vec![0.0; p];
    let mut block = vec![0.0; BLOCK * p];
    let mut start = 0;
    while start < n && p > 0 {
        let rows = BLOCK.min(n - start);
        block[..rows * p]
            .par_chunks_mut(p)
            .enumerate()
            .for_each_init(|| vec![0.0; p], |scratch, (k, row)| draw_row(factor, seed, start + k, scratch, row));
        for row in block[..rows * p].chunks(p) {
            for (s, &x) in sums.iter_mut().zip(row) {
                *s += x * x;
            }
        }
        start += rows;
    }
    let inv = 1.0 / n.max(1) as f64;
    VertexMoments {
        n,
        moments: sums.into_iter().map(|s| s * inv).collect(),
    }
}

impl SampleMatrix {
    pub fn from_data(n: usize, p: usize, seed: u64, data: Vec<f64>) -> Result<Self> {
        if data.len() != n * p {
            return Err(Error::DimensionMismatch(data.len(), n * p));
        }
        Ok(Self { n, p, seed, data })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.p..(r + 1) * self.p]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    /// Samples with every value multiplied by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        Self {
            data: self.data.iter().map(|x| x * c).collect(),
            ..self.clone()
        }
    }

    /// Per-vertex second moments, accumulated in row order.
    pub fn second_moments(&self) -> VertexMoments {
        let mut sums = vec![0.0; self.p];
        for row in self.data.chunks(self.p.max(1)) {
            for (s, &x) in sums.iter_mut().zip(row) {
                *s += x * x;
            }
        }
        let inv = 1.0 / self.n.max(1) as f64;
        VertexMoments {
            n: self.n,
            moments: sums.into_iter().map(|s| s * inv).collect(),
        }
    }

    /// Full sample covariance `(1/n) X^T X`.
    pub fn covariance(&self) -> DMatrix<f64> {
        let x = DMatrix::from_row_slice(self.n, self.p, &self.data);
        (x.transpose() * &x) / self.n as f64
    }

    /// Binary form: magic, `n`, `p`, `seed` as little-endian u64, then row-major f64.
    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(MAGIC)?;
        for v in [self.n as u64, self.p as u64, self.seed] {
            w.write_all(&v.to_le_bytes())?;
        }
        let mut buf = Vec::with_capacity(self.data.len() * 8);
        for x in &self.data {
            buf.extend_from_slice(&x.to_le_bytes());
        }
        w.write_all(&buf)?;
        Ok(())
    }

    pub fn read_binary<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(Error::Format("not a sample matrix file".into()));
        }
        let mut word = [0u8; 8];
        let mut header = [0u64; 3];
        for h in &mut header {
            r.read_exact(&mut word)?;
            *h = u64::from_le_bytes(word);
        }
        let (n, p, seed) = (header[0] as usize, header[1] as usize, header[2]);
        let len = n.checked_mul(p).ok_or_else(|| Error::Format("header overflow".into()))?;
        let mut bytes = vec![0u8; len * 8];
        r.read_exact(&mut bytes)?;
        let data = bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
        Self::from_data(n, p, seed, data)
    }

    /// CSV with a header `x0,...,x{p-1}` and one sample per line.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record((0..self.p).map(|j| format!("x{j}")))?;
        for r in 0..self.n {
            out.write_record(self.row(r).iter().map(|x| format!("{x:?}")))?;
        }
        out.flush()?;
        Ok(())
    }
}

impl TraceSource for SampleMatrix {
    fn sample_count(&self) -> usize {
        self.n
    }

    fn dim(&self) -> usize {
        self.p
    }

    fn restricted_trace(&self, subset: &[usize]) -> Result<f64> {
        restricted_trace_covariance(self, subset)
    }
}

/// `Tr(Sigma_hat_A) = (1/n) sum_i |x_{A,i}|^2`, summed vertex by vertex.
pub fn restricted_trace_covariance(samples: &SampleMatrix, subset: &[usize]) -> Result<f64> {
    if subset.is_empty() {
        return Err(invalid("empty vertex subset"));
    }
    if let Some(&j) = subset.iter().find(|&&j| j >= samples.p) {
        return Err(invalid(format!("vertex {j} out of range")));
    }
    let inv = 1.0 / samples.n as f64;
    let mut total = 0.0;
    for &j in subset {
        let mut s = 0.0;
        for r in 0..samples.n {
            let x = samples.data[r * samples.p + j];
            s += x * x;
        }
        total += s * inv;
    }
    Ok(total)
}

/// Per-vertex second moments: the sufficient statistic for every restricted trace.
#[derive(Clone, Debug, PartialEq)]
pub struct VertexMoments {
    n: usize,
    moments: Vec<f64>,
}

impl VertexMoments {
    pub fn new(n: usize, moments: Vec<f64>) -> Self {
        Self { n, moments }
    }

    pub fn moments(&self) -> &[f64] {
        &self.moments
    }
}

impl TraceSource for VertexMoments {
    fn sample_count(&self) -> usize {
        self.n
    }

    fn dim(&self) -> usize {
        self.moments.len()
    }

    fn restricted_trace(&self, subset: &[usize]) -> Result<f64> {
        if subset.is_empty() {
            return Err(invalid("empty vertex subset"));
        }
        subset
            .iter()
            .map(|&j| self.moments.get(j).copied().ok_or_else(|| invalid(format!("vertex {j} out of range"))))
            .sum()
    }
}

fn spd_inverse(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    Ok(nalgebra::Cholesky::new(m.clone()).ok_or(Error::NotPositiveDefinite)?.inverse())
}

/// `1/2 Tr((J1 - J2)(J2^{-1} - J1^{-1}))` for dense precision matrices.
pub fn sym_kl_dense(j1: &DMatrix<f64>, j2: &DMatrix<f64>) -> Result<f64> {
    if j1.shape() != j2.shape() || !j1.is_square() {
        return Err(Error::DimensionMismatch(j1.nrows(), j2.nrows()));
    }
    let s1 = spd_inverse(j1)?;
    let s2 = spd_inverse(j2)?;
    let diff = j1 - j2;
    let dinv = s2 - s1;
    // trace of a product without forming it
    let tr: f64 = diff.iter().zip(dinv.transpose().iter()).map(|(a, b)| a * b).sum();
    Ok(0.5 * tr)
}

/// Symmetrized KL divergence between two precision models.
pub fn sym_kl(j1: &PrecisionModel, j2: &PrecisionModel) -> Result<f64> {
    if j1.p() != j2.p() {
        return Err(Error::DimensionMismatch(j1.p(), j2.p()));
    }
    sym_kl_dense(&j1.to_dense(), &j2.to_dense())
}

/// Upper bound on the symmetrized KL when a boundary between couplings
/// `theta_s` and `theta_t` moves by `delta_area`:
/// `1/2 ((theta_s - theta_t) / (1 - d theta_bar))^2 * eta d delta_area / 2`.
pub fn sym_kl_boundary_bound(theta_s: f64, theta_t: f64, d: usize, theta_bar: f64, eta: f64, delta_area: f64) -> Result<f64> {
    let cdp = d as f64 * theta_bar;
    if cdp >= 1.0 {
        return Err(Error::CorrelationDecay(cdp));
    }
    let ratio = (theta_s - theta_t) / (1.0 - cdp);
    Ok(0.5 * ratio * ratio * eta * d as f64 * delta_area / 2.0)
}
