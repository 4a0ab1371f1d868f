//! Experiment configuration, orchestration, metrics and rendering.

mod config;
mod experiment;
mod metrics;
mod render;

pub use config::{DetectionConfig, ExperimentConfig, GraphConfig, LayoutSpec, OutputConfig, SamplingConfig, SnapshotCadence};
pub use experiment::{
    run_experiment, run_from_manifest, trial_seed, ExperimentReport, Manifest, TrialFailure, TrialSummary, GRAPH_FILE, MANIFEST_FILE, METRICS_FILE,
    SERIES_FILE, TIMINGS_FILE, TRUTH_FILE,
};
pub use metrics::{
    area_error_series, compare_variants, read_metrics, step_records, steps_to_error, write_metrics, write_series, MetricsRecord, SeriesRow, VariantComparison,
    ALL_REGIONS,
};
pub use render::{render_state, snapshot_name};

/// Environment variable overriding the output directory.
pub const OUT_DIR_ENV: &str = "GMRF_OUT_DIR";
/// Environment variable setting the worker thread count.
pub const THREADS_ENV: &str = "GMRF_THREADS";

/// Applies environment overrides to a configuration.
pub fn apply_env_overrides(cfg: &mut ExperimentConfig) {
    if let Some(dir) = std::env::var_os(OUT_DIR_ENV) {
        cfg.output.directory = dir.into();
    }
}
