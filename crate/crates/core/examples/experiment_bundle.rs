//! Run a configured experiment, then replay it from its manifest and check the
//! metrics match byte for byte.

use std::path::PathBuf;

use gmrf_regions::harness::{run_experiment, run_from_manifest, ExperimentConfig, MANIFEST_FILE, METRICS_FILE};

fn main() -> gmrf_regions::Result<()> {
    let path = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/configs/smoke.toml")));
    let mut cfg = ExperimentConfig::load(&path)?;
    let out = std::env::temp_dir().join("gmrf-experiment-bundle");
    cfg.output.directory = out.join("first");
    let report = run_experiment(&cfg)?;
    for t in &report.trials {
        println!("trial {}: {} regions after {} steps, error {:.4}", t.trial, t.regions, t.steps, t.final_error);
    }
    let replay = run_from_manifest(&report.directory.join(MANIFEST_FILE), Some(out.join("replay")))?;
    let same = std::fs::read(report.directory.join(METRICS_FILE))? == std::fs::read(replay.directory.join(METRICS_FILE))?;
    println!("replay identical: {same}; outputs under {}", out.display());
    Ok(())
}
