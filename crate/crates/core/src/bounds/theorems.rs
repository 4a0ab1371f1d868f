//! Necessary and sufficient sample counts.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use super::curve::LogBase;
use super::vershik::c_beta;
use crate::error::{Error, Result};

/// Per-region inputs to the boundary bound.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegionBound {
    pub theta: f64,
    /// Circumscribed-square perimeter over square root of area, scale free.
    pub beta: f64,
    /// Fraction of the domain area.
    pub nu: f64,
}

/// Everything the bound evaluators need.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundInputs {
    pub p: f64,
    pub d: usize,
    pub xi: f64,
    pub rho: f64,
    pub eta: f64,
    /// Exponent splitting the resolution between area and boundary terms.
    pub phi: f64,
    pub regions: Vec<RegionBound>,
    /// Pairs of region indices sharing a boundary.
    pub adjacency: Vec<(usize, usize)>,
    #[serde(default)]
    pub log_base: LogBase,
}

impl BoundInputs {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if !(self.p > 1.0) || self.d == 0 {
            return bad(format!("need p > 1 and d > 0, got p = {}, d = {}", self.p, self.d));
        }
        if !(self.xi > 0.0 && self.xi <= 0.5) {
            return bad(format!("resolution exponent {} outside (0, 1/2]", self.xi));
        }
        if !(self.rho > 0.0 && self.eta > 0.0) {
            return bad("rho and eta must be positive".into());
        }
        if !(self.phi > 0.0 && self.phi <= 0.5) {
            return bad(format!("phi {} outside (0, 1/2]", self.phi));
        }
        if self.regions.is_empty() {
            return bad("no regions".into());
        }
        let nu: f64 = self.regions.iter().map(|r| r.nu).sum();
        if (nu - 1.0).abs() > 1e-9 || self.regions.iter().any(|r| r.nu <= 0.0) {
            return bad(format!("area fractions must be positive and sum to one, got {nu}"));
        }
        if self.regions.iter().any(|r| !(r.beta > 4.0)) {
            return bad("every shape ratio must exceed 4".into());
        }
        if self.regions.iter().any(|r| !(r.theta > 0.0)) {
            return bad("couplings must be positive".into());
        }
        check_decay(self.d, self.theta_bar())?;
        for &(s, t) in &self.adjacency {
            if s >= self.regions.len() || t >= self.regions.len() || s == t {
                return bad(format!("bad adjacency pair ({s}, {t})"));
            }
        }
        Ok(())
    }

    pub fn theta_bar(&self) -> f64 {
        self.regions.iter().map(|r| r.theta).fold(f64::MIN, f64::max)
    }

    pub fn theta_under(&self) -> f64 {
        self.regions.iter().map(|r| r.theta).fold(f64::MAX, f64::min)
    }

    /// Smallest coupling gap across a shared boundary.
    pub fn delta_under(&self) -> f64 {
        self.adjacency
            .iter()
            .map(|&(s, t)| (self.regions[s].theta - self.regions[t].theta).abs())
            .fold(f64::INFINITY, f64::min)
    }

    pub fn beta_bar(&self) -> f64 {
        self.regions.iter().map(|r| r.beta).fold(f64::MIN, f64::max)
    }

    pub fn nu_bar(&self) -> f64 {
        self.regions.iter().map(|r| r.nu).fold(f64::MIN, f64::max)
    }

    pub fn region_count(&self) -> usize {
        self.regions.len()
    }

    pub fn with_p(&self, p: f64) -> Self {
        Self { p, ..self.clone() }
    }
}

fn check_decay(d: usize, theta_bar: f64) -> Result<()> {
    if d as f64 * theta_bar >= 1.0 {
        return Err(Error::CorrelationDecay(d as f64 * theta_bar));
    }
    Ok(())
}

/// Necessary count from the number of admissible partitions alone:
/// `d ln(p^xi / d) / ln((2 pi e)^2 / (1 - d theta_bar))`.
pub fn theorem1_bound(p: f64, d: usize, theta_bar: f64, xi: f64) -> Result<f64> {
    check_decay(d, theta_bar)?;
    let df = d as f64;
    if !(p.powf(xi) > df) {
        return Err(Error::InvalidArgument(format!("need p^xi > d, got {} <= {df}", p.powf(xi))));
    }
    let two_pi_e = 2.0 * std::f64::consts::PI * std::f64::consts::E;
    Ok(df * (p.powf(xi) / df).ln() / (two_pi_e.powi(2) / (1.0 - df * theta_bar)).ln())
}

/// Necessary count from boundary uncertainty, using the fixed-ratio constant.
pub fn theorem2_bound(inputs: &BoundInputs) -> Result<f64> {
    let base = inputs.log_base;
    theorem2_bound_with(inputs, |beta| c_beta(beta, base))
}

/// As [`theorem2_bound`] with a caller-supplied boundary constant.
///
/// Evaluates, over ordered adjacent pairs `(s, t)`, the minimum of
/// `rho^(1 - 2 phi) C(beta_s) / (r^2 eta d beta_s nu_s^(1/2) (p / eta)^e)`
/// with `r = (theta_s - theta_t) / (1 - d theta_bar)` and
/// `e = 1/2 + xi - phi (1 - 2 xi)`.
pub fn theorem2_bound_with(inputs: &BoundInputs, c: impl Fn(f64) -> Result<f64>) -> Result<f64> {
    inputs.validate()?;
    if inputs.adjacency.is_empty() {
        return Err(Error::InvalidArgument("no adjacent region pair".into()));
    }
    let df = inputs.d as f64;
    let decay = 1.0 - df * inputs.theta_bar();
    let e = 0.5 + inputs.xi - inputs.phi * (1.0 - 2.0 * inputs.xi);
    let scale = inputs.rho.powf(1.0 - 2.0 * inputs.phi) / (inputs.eta * df * (inputs.p / inputs.eta).powf(e));
    let mut best = f64::INFINITY;
    for &(i, j) in &inputs.adjacency {
        for (s, t) in [(i, j), (j, i)] {
            let rs = &inputs.regions[s];
            let r = (rs.theta - inputs.regions[t].theta) / decay;
            let v = scale * c(rs.beta)? / (r * r * rs.beta * rs.nu.sqrt());
            best = best.min(v);
        }
    }
    Ok(best)
}

/// Value of a sufficient count together with its asymptotic shape
/// `p^p_exponent (ln p)^log_power`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthRate {
    pub value: f64,
    pub p_exponent: f64,
    pub log_power: f64,
}

/// Sample count above which region growing succeeds, up to a constant.
pub fn gred_sufficient(inputs: &BoundInputs) -> Result<GrowthRate> {
    inputs.validate()?;
    if inputs.adjacency.is_empty() {
        return Err(Error::InvalidArgument("no adjacent region pair".into()));
    }
    let (p, xi, rho, eta) = (inputs.p, inputs.xi, inputs.rho, inputs.eta);
    let df = inputs.d as f64;
    let common = rho * rho * df * inputs.theta_under() * inputs.delta_under() * (1.0 - df * inputs.theta_bar());
    if (xi - 0.5).abs() < 1e-12 {
        let s = inputs.region_count() as f64;
        let arg = s * eta.sqrt() * inputs.beta_bar() * inputs.nu_bar().sqrt() / rho;
        if arg <= 1.0 {
            return Err(Error::Infeasible(format!("log argument {arg} must exceed 1")));
        }
        Ok(GrowthRate {
            value: arg.ln().sqrt() / (p * common * eta),
            p_exponent: -1.0,
            log_power: 0.0,
        })
    } else {
        let value = p.ln().sqrt() / p.powf(2.0 * xi) / (common * eta.powf(1.0 - 2.0 * xi));
        Ok(GrowthRate {
            value,
            p_exponent: -2.0 * xi,
            log_power: 0.5,
        })
    }
}

/// Natural log of the asymptotic number of labeled `d`-regular graphs on `k` vertices.
pub fn mckay_log_count(k: u64, d: u64) -> Result<f64> {
    if (k * d) % 2 == 1 {
        return Err(Error::InvalidArgument(format!("no {d}-regular graph on {k} vertices")));
    }
    if k == 0 || d == 0 {
        return Err(Error::InvalidArgument("need k > 0 and d > 0".into()));
    }
    let lf = |n: f64| ln_gamma(n + 1.0);
    let (kf, df) = (k as f64, d as f64);
    let kd = kf * df;
    Ok(lf(kd) - lf(kd / 2.0) - kd / 2.0 * std::f64::consts::LN_2 - kf * lf(df) - (df * df - 1.0) / 4.0 - df.powi(3) / (12.0 * kf))
}

/// Whether `(k, d)` lies in the regime where the count is accurate (`d^2 < k`).
pub fn mckay_regime_ok(k: u64, d: u64) -> bool {
    d * d < k
}

/// Log of a lower bound on the number of admissible graphs: `(d p / 2) ln(p^xi / d)`.
pub fn log_graph_family_lower(p: f64, d: usize, xi: f64) -> Result<f64> {
    let df = d as f64;
    if !(p.powf(xi) > df) {
        return Err(Error::InvalidArgument("need p^xi > d".into()));
    }
    Ok(df * p / 2.0 * (p.powf(xi) / df).ln())
}
