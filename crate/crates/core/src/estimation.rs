//! Local coupling estimates from the trace of a restricted sample covariance.
//!
//! For a set `A` of `k` vertices inside one region with coupling `theta`,
//! `Tr(Sigma_A) = k + d k theta^2 q(theta)` with `|q - 1| <= 2 theta d`. The
//! estimate inverts this with `q = 1`:
//!
//! ```text
//! theta_hat^2 = (Tr(Sigma_hat_A) - k) / (d k)
//! ```
//!
//! Negative values (sampling noise near zero coupling) are clamped to zero
//! before the square root; an optional floor clamps the result from below.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::gaussian::TraceSource;

/// Estimator settings.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimatorConfig {
    /// Degree `d` used in the normalization.
    pub d: usize,
    /// Lower clamp for the estimate.
    pub floor: Option<f64>,
    /// Cells with fewer vertices are unresolvable.
    pub k_min: usize,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        Self { d: 4, floor: None, k_min: 10 }
    }
}

/// Coupling estimate over one vertex set.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellEstimate {
    /// Number of vertices.
    pub k: usize,
    /// Clamped estimate.
    pub theta_hat: f64,
    /// Estimate of `theta^2` before clamping; may be negative.
    pub raw_theta_sq: f64,
}

/// Converts a restricted trace into `(raw theta^2, clamped theta)`.
pub fn theta_from_trace(trace: f64, k: usize, d: usize, floor: Option<f64>) -> (f64, f64) {
    let raw = (trace - k as f64) / (d as f64 * k as f64);
    let mut hat = raw.max(0.0).sqrt();
    if let Some(f) = floor {
        hat = hat.max(f);
    }
    (raw, hat)
}

/// Estimates the coupling over `vertices`.
///
/// Fails with [`Error::Unresolvable`] when fewer than `cfg.k_min` vertices
/// (or none) are given.
pub fn estimate_theta<S: TraceSource + ?Sized>(source: &S, vertices: &[usize], cfg: &EstimatorConfig) -> Result<CellEstimate> {
    if cfg.d == 0 {
        return Err(invalid("degree must be positive"));
    }
    let k = vertices.len();
    if k == 0 || k < cfg.k_min {
        return Err(Error::Unresolvable {
            found: k,
            min: cfg.k_min.max(1),
        });
    }
    let trace = source.restricted_trace(vertices)?;
    let (raw_theta_sq, theta_hat) = theta_from_trace(trace, k, cfg.d, cfg.floor);
    Ok(CellEstimate { k, theta_hat, raw_theta_sq })
}

/// Exact `q(theta) = (Tr((J_A - Omega)^{-1}) - k) / (d k theta^2)` with
/// `Omega = J_AB J_B^{-1} J_AB^T`, evaluated through the Schur complement.
pub fn q_ratio_oracle(j: &DMatrix<f64>, subset: &[usize], theta: f64, d: usize) -> Result<f64> {
    if !(theta > 0.0) {
        return Err(invalid("theta must be positive"));
    }
    let p = j.nrows();
    let k = subset.len();
    if k == 0 || subset.iter().any(|&v| v >= p) {
        return Err(invalid("subset must be nonempty and in range"));
    }
    let mut in_a = vec![false; p];
    for &v in subset {
        in_a[v] = true;
    }
    let rest: Vec<usize> = (0..p).filter(|&v| !in_a[v]).collect();
    let j_a = j.select_rows(subset).select_columns(subset);
    let schur = if rest.is_empty() {
        j_a
    } else {
        let j_b = j.select_rows(&rest).select_columns(&rest);
        let j_ab = j.select_rows(subset).select_columns(&rest);
        let chol_b = nalgebra::Cholesky::new(j_b).ok_or(Error::NotPositiveDefinite)?;
        let solved = chol_b.solve(&j_ab.transpose());
        j_a - &j_ab * solved
    };
    let sigma_a = nalgebra::Cholesky::new(schur).ok_or(Error::NotPositiveDefinite)?.inverse();
    Ok((sigma_a.trace() - k as f64) / (d as f64 * k as f64 * theta * theta))
}

/// Concentration bound `min(1, 2 exp(-(2 n k d theta_under)^2 (1 - d theta_bar) t^2))`.
pub fn concentration_bound(n: usize, k: usize, d: usize, theta_under: f64, theta_bar: f64, t: f64) -> Result<f64> {
    let cdp = d as f64 * theta_bar;
    if cdp >= 1.0 {
        return Err(Error::CorrelationDecay(cdp));
    }
    if n == 0 || k == 0 || d == 0 || !(theta_under > 0.0) || !(t >= 0.0) {
        return Err(invalid("parameters must be positive"));
    }
    let a = 2.0 * n as f64 * k as f64 * d as f64 * theta_under;
    Ok((2.0 * (-(a * a) * (1.0 - cdp) * t * t).exp()).min(1.0))
}
