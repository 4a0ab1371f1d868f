use std::path::{Path, PathBuf};
use std::process::Command;

use gmrf_regions::harness::{read_metrics, run_experiment, ExperimentConfig, ALL_REGIONS, MANIFEST_FILE, METRICS_FILE, OUT_DIR_ENV, SERIES_FILE};

fn smoke_config(out: &Path) -> ExperimentConfig {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/smoke.toml");
    let mut cfg = ExperimentConfig::load(&path).unwrap();
    cfg.output.directory = out.to_path_buf();
    cfg
}

fn cli() -> Command {
    Command::new(env!("CARGO_BIN_EXE_gmrf-regions"))
}

#[test]
fn smoke_experiment_recovers_both_strips() {
    let dir = tempfile::tempdir().unwrap();
    let report = run_experiment(&smoke_config(dir.path())).unwrap();
    assert!(report.all_succeeded());
    assert_eq!(report.trials.len(), 2);
    for t in &report.trials {
        assert_eq!(t.regions, 2, "trial {}", t.trial);
        assert!(t.final_error < 0.02, "trial {}: {}", t.trial, t.final_error);
    }
    for file in [METRICS_FILE, SERIES_FILE, MANIFEST_FILE] {
        assert!(dir.path().join(file).is_file(), "{file} missing");
    }
    let snapshots = std::fs::read_dir(dir.path().join("trial000"))
        .unwrap()
        .filter(|e| e.as_ref().unwrap().path().extension().is_some_and(|x| x == "svg"))
        .count();
    assert!(snapshots >= 1);

    let header = std::fs::read_to_string(dir.path().join(METRICS_FILE)).unwrap();
    assert!(header.starts_with("trial,iter,sub,tau,region,sym_diff_area,gray_area,ahat_over_a,ms\n"));
    let records = read_metrics(std::fs::File::open(dir.path().join(METRICS_FILE)).unwrap()).unwrap();
    assert_eq!(records, report.records);
    assert!(records.iter().any(|r| r.region == ALL_REGIONS));
}

#[test]
fn cli_reports_config_errors_with_code_one() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "trials = 0\n").unwrap();
    let status = cli().args(["experiment", "--config"]).arg(&bad).status().unwrap();
    assert_eq!(status.code(), Some(1));
    let status = cli().arg("no-such-command").output().unwrap().status;
    assert_eq!(status.code(), Some(1));
}

#[test]
fn cli_bounds_sweep_and_output_override() {
    let out = cli().args(["bounds", "--points", "3"]).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 4);

    let dir = tempfile::tempdir().unwrap();
    let target: PathBuf = dir.path().join("elsewhere");
    let config = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/smoke.toml");
    let status = cli().args(["generate", "--config"]).arg(&config).env(OUT_DIR_ENV, &target).status().unwrap();
    assert!(status.success());
    assert!(target.join("graph.json").is_file());
}
