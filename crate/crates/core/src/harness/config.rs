use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Rect, RegionLayout};
use crate::graphgen::{CrossCoupling, GraphParams};
use crate::gred::{default_tau0, default_zeta, diamond_pattern, ConvexifyWhen, Frame, GredParams, Variant};

/// How the ground-truth regions are laid out.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LayoutSpec {
    /// Equal squares, labelled row by row from the lower-left; one theta each.
    Grid { rows: usize, cols: usize },
    /// A layout given in full; its own thetas are used.
    Explicit { layout: RegionLayout },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphConfig {
    pub p: usize,
    pub d: usize,
    pub w_min: f64,
    pub w_max: f64,
    pub domain: Rect,
    pub layout: LayoutSpec,
    #[serde(default)]
    pub thetas: Vec<f64>,
    #[serde(default)]
    pub cross_coupling: CrossCoupling,
    pub rho: f64,
    pub xi: f64,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplingConfig {
    pub n: usize,
    pub seed: u64,
}

fn default_refine() -> u32 {
    2
}
fn default_k_min() -> usize {
    10
}
fn default_true() -> bool {
    true
}

/// Detection settings; unset `tau0` and `zeta` are derived from the ground truth.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetectionConfig {
    #[serde(default)]
    pub tau0: Option<f64>,
    #[serde(default)]
    pub zeta: Option<f64>,
    #[serde(default)]
    pub variant: Variant,
    #[serde(default)]
    pub convexify_when: ConvexifyWhen,
    #[serde(default = "default_refine")]
    pub refine_factor: u32,
    #[serde(default = "default_k_min")]
    pub k_min: usize,
    #[serde(default)]
    pub theta_floor: Option<f64>,
    /// Anchor the lattice at this frame; otherwise at the domain's lower-left corner.
    #[serde(default)]
    pub frame: Option<Frame>,
    #[serde(default)]
    pub seed_pattern: Option<Vec<(i64, i64)>>,
    #[serde(default = "default_true")]
    pub update_estimates: bool,
}

impl Default for DetectionConfig {
    fn default() -> Self {
        Self {
            tau0: None,
            zeta: None,
            variant: Variant::Basic,
            convexify_when: ConvexifyWhen::EachIteration,
            refine_factor: default_refine(),
            k_min: default_k_min(),
            theta_floor: None,
            frame: None,
            seed_pattern: None,
            update_estimates: true,
        }
    }
}

/// Which detection steps are rendered.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SnapshotCadence {
    #[default]
    EverySubiteration,
    EveryIteration,
    Final,
    None,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutputConfig {
    pub directory: PathBuf,
    #[serde(default)]
    pub snapshots: SnapshotCadence,
    /// Record wall times; they go to a separate file so metrics stay reproducible.
    #[serde(default)]
    pub timing: bool,
}

/// Complete description of an experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub graph: GraphConfig,
    pub sampling: SamplingConfig,
    #[serde(default)]
    pub detection: DetectionConfig,
    pub output: OutputConfig,
    #[serde(default = "one")]
    pub trials: usize,
}

fn one() -> usize {
    1
}

fn config_err(e: impl std::fmt::Display) -> Error {
    Error::Config(e.to_string())
}

impl ExperimentConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(s).map_err(config_err)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(config_err)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    /// Checks everything that can be checked before generating data.
    pub fn validate(&self) -> Result<()> {
        let g = &self.graph;
        if g.p == 0 || g.d == 0 {
            return Err(config_err("p and d must be positive"));
        }
        if !(g.w_min >= 0.0 && g.w_max > 0.0) {
            return Err(config_err("w_min must be nonnegative and w_max positive"));
        }
        if self.sampling.n == 0 || self.trials == 0 {
            return Err(config_err("n and trials must be positive"));
        }
        let truth = self.truth_layout().map_err(config_err)?;
        let theta_bar = truth.regions().iter().map(|r| r.theta).fold(0.0, f64::max);
        if g.d as f64 * theta_bar >= 1.0 {
            return Err(config_err(format!("d * theta_bar = {} must be below 1", g.d as f64 * theta_bar)));
        }
        self.gred_params(g.p as f64 / g.domain.area())
            .map_err(config_err)?
            .validate()
            .map_err(config_err)?;
        Ok(())
    }

    /// Ground-truth layout.
    pub fn truth_layout(&self) -> Result<RegionLayout> {
        let g = &self.graph;
        match &g.layout {
            LayoutSpec::Grid { rows, cols } => RegionLayout::grid(g.domain, *rows, *cols, &g.thetas, g.rho, g.xi),
            LayoutSpec::Explicit { layout } => Ok(layout.clone()),
        }
    }

    pub fn graph_params(&self) -> GraphParams {
        let g = &self.graph;
        GraphParams {
            domain: g.domain,
            p: g.p,
            d: g.d,
            w_min: g.w_min,
            w_max: g.w_max,
            seed: g.seed,
        }
    }

    /// Detection parameters for vertex density `eta`, filling defaults from the truth.
    pub fn gred_params(&self, eta: f64) -> Result<GredParams> {
        let det = &self.detection;
        let truth = self.truth_layout()?;
        let tau0 = match det.tau0 {
            Some(t) => t,
            None => default_tau0(&truth)?,
        };
        let zeta = match det.zeta {
            Some(z) => z,
            None => default_zeta(&truth)?,
        };
        let mut p = GredParams::new(tau0, zeta, self.graph.d, self.graph.rho, self.graph.xi, eta);
        p.refine_factor = det.refine_factor;
        p.k_min = det.k_min;
        p.theta_floor = det.theta_floor;
        p.known_frame = det.frame;
        p.seed_pattern = det.seed_pattern.clone().unwrap_or_else(diamond_pattern);
        p.update_estimates = det.update_estimates;
        Ok(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const SMALL: &str = r#"
trials = 2

[graph]
p = 500
d = 4
w_min = 0.01
w_max = 0.1
domain = { x0 = 0.0, y0 = 0.0, x1 = 2.0, y1 = 1.0 }
layout = { kind = "grid", rows = 1, cols = 2 }
thetas = [0.04, 0.08]
rho = 0.02
xi = 0.5
seed = 7

[sampling]
n = 500
seed = 11

[detection]
tau0 = 0.4
k_min = 5

[output]
directory = "out"
"#;

    #[test]
    fn parses_and_round_trips() {
        let cfg = ExperimentConfig::from_toml_str(SMALL).unwrap();
        assert_eq!(cfg.graph.cross_coupling, CrossCoupling::Mean);
        assert_eq!(cfg.detection.zeta, None);
        let back = ExperimentConfig::from_toml_str(&cfg.to_toml_string().unwrap()).unwrap();
        assert_eq!(back, cfg);
        let gp = cfg.gred_params(250.0).unwrap();
        assert!((gp.zeta - 0.02).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(matches!(ExperimentConfig::from_toml_str("trials = 1"), Err(Error::Config(_))));
        let strong = SMALL.replace("[0.04, 0.08]", "[0.04, 0.3]");
        assert!(matches!(ExperimentConfig::from_toml_str(&strong), Err(Error::Config(_))));
        let short = SMALL.replace("[0.04, 0.08]", "[0.04]");
        assert!(ExperimentConfig::from_toml_str(&short).is_err());
    }
}
