use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, SnapshotCadence};
use super::metrics::{area_error_series, step_records, write_metrics, write_series, MetricsRecord};
use super::render::{render_state, snapshot_name};
use crate::error::{Error, Result};
use crate::gaussian::sample_second_moments;
use crate::geometry::{symmetric_difference_area, RegionLayout};
use crate::graphgen::{build_precision, PrecisionModel, SpatialGraph};
use crate::gred::{detect, DetectionResult, DetectionState};

pub const GRAPH_FILE: &str = "graph.json";
pub const TRUTH_FILE: &str = "truth.json";
pub const METRICS_FILE: &str = "metrics.csv";
pub const SERIES_FILE: &str = "series.csv";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const TIMINGS_FILE: &str = "timings.csv";

/// Sampling seed of a trial; trial 0 uses the configured seed.
pub fn trial_seed(base: u64, trial: usize) -> u64 {
    base.wrapping_add((trial as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

/// A trial that raised an error.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialFailure {
    pub trial: usize,
    pub error: String,
}

/// Final numbers of a completed trial.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialSummary {
    pub trial: usize,
    pub seeds: usize,
    pub regions: usize,
    pub steps: usize,
    /// Total symmetric difference over total true area.
    pub final_error: f64,
    pub diagnostic: Option<String>,
}

/// Everything needed to rerun an experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub version: String,
    pub config: ExperimentConfig,
    pub trial_seeds: Vec<u64>,
    pub p: usize,
    pub eta: f64,
    pub files: Vec<String>,
    pub trials: Vec<TrialSummary>,
    pub failures: Vec<TrialFailure>,
}

impl Manifest {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }
}

/// Outputs of [`run_experiment`].
#[derive(Clone, Debug)]
pub struct ExperimentReport {
    pub directory: PathBuf,
    pub records: Vec<MetricsRecord>,
    pub trials: Vec<TrialSummary>,
    pub failures: Vec<TrialFailure>,
    pub manifest: Manifest,
}

impl ExperimentReport {
    pub fn all_succeeded(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Loads the cached graph in `dir` if it was generated from the same parameters.
fn load_or_generate(cfg: &ExperimentConfig, truth: &RegionLayout, dir: &Path) -> Result<SpatialGraph> {
    let path = dir.join(GRAPH_FILE);
    let params = cfg.graph_params();
    if let Ok(text) = fs::read_to_string(&path) {
        if let Ok(g) = SpatialGraph::from_json(&text) {
            let thetas = truth.regions().iter().map(|r| (r.label, r.theta)).collect();
            if g.params == params && g.thetas == thetas {
                return Ok(g);
            }
        }
    }
    let g = SpatialGraph::generate(params, truth)?;
    fs::write(&path, g.to_json()?)?;
    Ok(g)
}

fn rendered(snapshots: &[DetectionState], cadence: SnapshotCadence) -> Vec<&DetectionState> {
    match cadence {
        SnapshotCadence::EverySubiteration => snapshots.iter().collect(),
        SnapshotCadence::EveryIteration => snapshots
            .iter()
            .enumerate()
            .filter(|(k, s)| snapshots.get(k + 1).is_none_or(|n| n.iteration != s.iteration))
            .map(|(_, s)| s)
            .collect(),
        SnapshotCadence::Final => snapshots.last().into_iter().collect(),
        SnapshotCadence::None => Vec::new(),
    }
}

struct TrialOutput {
    records: Vec<MetricsRecord>,
    summary: TrialSummary,
    ms: f64,
}

fn run_trial(cfg: &ExperimentConfig, graph: &SpatialGraph, model: &PrecisionModel, truth: &RegionLayout, trial: usize, dir: &Path) -> Result<TrialOutput> {
    let seed = trial_seed(cfg.sampling.seed, trial);
    let start = Instant::now();
    let moments = sample_second_moments(model, cfg.sampling.n, seed);
    let params = cfg.gred_params(model.eta())?;
    let result: DetectionResult = detect(
        &moments,
        &graph.coords,
        &cfg.graph.domain,
        &params,
        cfg.detection.variant,
        cfg.detection.convexify_when,
    )?;
    let ms = start.elapsed().as_secs_f64() * 1e3;
    let timing = cfg.output.timing.then_some(ms);
    let mut records = Vec::new();
    for snap in &result.snapshots {
        records.extend(step_records(trial, snap, truth, timing)?);
    }
    let trial_dir = dir.join(format!("trial{trial:03}"));
    fs::create_dir_all(&trial_dir)?;
    for snap in rendered(&result.snapshots, cfg.output.snapshots) {
        fs::write(trial_dir.join(snapshot_name(snap)), render_state(snap, Some(truth)))?;
    }
    fs::write(trial_dir.join("layout.json"), result.layout.to_json()?)?;
    let final_error = symmetric_difference_area(truth, &result.layout).total() / truth.total_area();
    let summary = TrialSummary {
        trial,
        seeds: result.seeds.len(),
        regions: result.layout.regions().len(),
        steps: result.snapshots.len(),
        final_error,
        diagnostic: result.diagnostic,
    };
    Ok(TrialOutput { records, summary, ms })
}

/// Generates (or reuses) the graph, runs every trial in parallel, and writes
/// metrics, snapshots and a manifest into the output directory.
///
/// Configuration problems are returned as errors; failures inside a trial
/// are recorded and the remaining trials still run.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let dir = cfg.output.directory.clone();
    fs::create_dir_all(&dir)?;
    let truth = cfg.truth_layout()?;
    fs::write(dir.join(TRUTH_FILE), truth.to_json()?)?;
    fs::write(dir.join("config.toml"), cfg.to_toml_string()?)?;
    let graph = load_or_generate(cfg, &truth, &dir)?;
    let model = build_precision(&graph, cfg.graph.cross_coupling)?;

    let outputs: Vec<(usize, Result<TrialOutput>)> = (0..cfg.trials)
        .into_par_iter()
        .map(|t| (t, run_trial(cfg, &graph, &model, &truth, t, &dir)))
        .collect();

    let mut records = Vec::new();
    let mut trials = Vec::new();
    let mut failures = Vec::new();
    let mut timings = Vec::new();
    for (trial, out) in outputs {
        match out {
            Ok(o) => {
                records.extend(o.records);
                trials.push(o.summary);
                timings.push((trial, o.ms));
            }
            Err(e) => failures.push(TrialFailure { trial, error: e.to_string() }),
        }
    }
    write_metrics(&records, fs::File::create(dir.join(METRICS_FILE))?)?;
    let mut files = vec![TRUTH_FILE.to_string(), GRAPH_FILE.into(), METRICS_FILE.into()];
    if !records.is_empty() {
        let series = area_error_series(&records, truth.total_area())?;
        write_series(&series, fs::File::create(dir.join(SERIES_FILE))?)?;
        files.push(SERIES_FILE.into());
    }
    if cfg.output.timing {
        let mut wr = csv::Writer::from_path(dir.join(TIMINGS_FILE))?;
        wr.write_record(["trial", "ms"])?;
        for (t, ms) in &timings {
            wr.write_record([t.to_string(), format!("{ms:.3}")])?;
        }
        wr.flush()?;
        files.push(TIMINGS_FILE.into());
    }
    let manifest = Manifest {
        version: env!("CARGO_PKG_VERSION").to_string(),
        config: cfg.clone(),
        trial_seeds: (0..cfg.trials).map(|t| trial_seed(cfg.sampling.seed, t)).collect(),
        p: graph.p(),
        eta: model.eta(),
        files,
        trials: trials.clone(),
        failures: failures.clone(),
    };
    fs::write(dir.join(MANIFEST_FILE), serde_json::to_string_pretty(&manifest)?)?;
    Ok(ExperimentReport {
        directory: dir,
        records,
        trials,
        failures,
        manifest,
    })
}

/// Reruns the experiment recorded in a manifest, optionally into another directory.
pub fn run_from_manifest(path: &Path, directory: Option<PathBuf>) -> Result<ExperimentReport> {
    let manifest = Manifest::load(path)?;
    let mut cfg = manifest.config.clone();
    let expected: Vec<u64> = (0..cfg.trials).map(|t| trial_seed(cfg.sampling.seed, t)).collect();
    if expected != manifest.trial_seeds {
        return Err(Error::Config("manifest seeds do not match its configuration".into()));
    }
    if let Some(d) = directory {
        cfg.output.directory = d;
    }
    run_experiment(&cfg)
}
