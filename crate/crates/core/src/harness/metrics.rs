use std::collections::BTreeMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{symmetric_difference_area, RegionLayout};
use crate::gred::DetectionState;

/// Label used in the `region` column for whole-layout totals.
pub const ALL_REGIONS: &str = "all";

/// One row of the metrics table.
///
/// Each detection step yields one row per ground-truth region and one
/// `region = "all"` row with totals, where unmatched detections count as error.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsRecord {
    pub trial: usize,
    pub iter: usize,
    pub sub: usize,
    pub tau: f64,
    pub region: String,
    pub sym_diff_area: f64,
    /// Domain area not assigned to any region.
    pub gray_area: f64,
    /// Matched detected area over true area; 0 when nothing is matched.
    pub ahat_over_a: f64,
    /// Wall time in milliseconds, left empty unless timing is enabled.
    pub ms: Option<f64>,
}

impl MetricsRecord {
    pub fn is_total(&self) -> bool {
        self.region == ALL_REGIONS
    }
}

/// Rows describing one detection step against the ground truth.
pub fn step_records(trial: usize, state: &DetectionState, truth: &RegionLayout, ms: Option<f64>) -> Result<Vec<MetricsRecord>> {
    let detected = state.to_layout(truth.rho(), truth.xi())?;
    let report = symmetric_difference_area(truth, &detected);
    let gray = state.gray_area();
    let row = |region: String, sym: f64, ratio: f64| MetricsRecord {
        trial,
        iter: state.iteration,
        sub: state.subiteration,
        tau: state.tau(),
        region,
        sym_diff_area: sym,
        gray_area: gray,
        ahat_over_a: ratio,
        ms,
    };
    let mut out = Vec::new();
    for (&label, &area) in &report.reference_area {
        let matched = report.matching.get(&label).map(|d| report.detected_area[d]).unwrap_or(0.0);
        out.push(row(label.to_string(), report.per_region[&label], matched / area));
    }
    let total_ref = report.reference_area.values().fold(0.0, |a, b| a + b);
    let total_det = report.detected_area.values().fold(0.0, |a, b| a + b);
    out.push(row(ALL_REGIONS.into(), report.total(), total_det / total_ref));
    Ok(out)
}

/// Writes records with the fixed header
/// `trial,iter,sub,tau,region,sym_diff_area,gray_area,ahat_over_a,ms`.
pub fn write_metrics<W: Write>(records: &[MetricsRecord], w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    for r in records {
        wr.serialize(r)?;
    }
    wr.flush()?;
    Ok(())
}

pub fn read_metrics<R: Read>(r: R) -> Result<Vec<MetricsRecord>> {
    csv::Reader::from_reader(r).deserialize().map(|x| x.map_err(Error::from)).collect()
}

/// Cross-trial statistics at one step.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesRow {
    /// Position in the step sequence shared by all trials.
    pub step: usize,
    pub iter: usize,
    pub sub: usize,
    pub tau: f64,
    pub trials: usize,
    pub mean_ratio: f64,
    pub std_ratio: f64,
    /// Total symmetric difference over total true area.
    pub mean_error: f64,
    pub std_error: f64,
}

fn mean_std(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    let var = if v.len() > 1 {
        v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    (m, var.sqrt())
}

/// Per-step mean and spread of the area ratio and relative error across trials.
///
/// Trials that halt early keep contributing their final values to later steps.
pub fn area_error_series(records: &[MetricsRecord], total_area: f64) -> Result<Vec<SeriesRow>> {
    if records.is_empty() {
        return Err(Error::InvalidArgument("no metrics records".into()));
    }
    let mut per_trial: BTreeMap<usize, Vec<&MetricsRecord>> = BTreeMap::new();
    for r in records.iter().filter(|r| r.is_total()) {
        per_trial.entry(r.trial).or_default().push(r);
    }
    for rows in per_trial.values_mut() {
        rows.sort_by_key(|r| (r.iter, r.sub));
    }
    let steps = per_trial.values().map(Vec::len).max().unwrap_or(0);
    let mut out = Vec::with_capacity(steps);
    for step in 0..steps {
        let at: Vec<&MetricsRecord> = per_trial.values().map(|rows| rows[step.min(rows.len() - 1)]).collect();
        let ratios: Vec<f64> = at.iter().map(|r| r.ahat_over_a).collect();
        let errors: Vec<f64> = at.iter().map(|r| r.sym_diff_area / total_area).collect();
        let (mean_ratio, std_ratio) = mean_std(&ratios);
        let (mean_error, std_error) = mean_std(&errors);
        let lead = per_trial.values().find(|rows| rows.len() > step).map(|rows| rows[step]).unwrap_or(at[0]);
        out.push(SeriesRow {
            step,
            iter: lead.iter,
            sub: lead.sub,
            tau: lead.tau,
            trials: at.len(),
            mean_ratio,
            std_ratio,
            mean_error,
            std_error,
        });
    }
    Ok(out)
}

pub fn write_series<W: Write>(rows: &[SeriesRow], w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    for r in rows {
        wr.serialize(r)?;
    }
    wr.flush()?;
    Ok(())
}

/// First step whose mean relative error is at most `threshold`.
pub fn steps_to_error(series: &[SeriesRow], threshold: f64) -> Option<usize> {
    series.iter().find(|r| r.mean_error <= threshold).map(|r| r.step)
}

/// Steps each variant needs to reach an error level.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VariantComparison {
    pub threshold: f64,
    pub basic_steps: Option<usize>,
    pub convex_steps: Option<usize>,
    pub basic_final_error: f64,
    pub convex_final_error: f64,
}

pub fn compare_variants(basic: &[SeriesRow], convex: &[SeriesRow], threshold: f64) -> VariantComparison {
    let last = |s: &[SeriesRow]| s.last().map(|r| r.mean_error).unwrap_or(f64::NAN);
    VariantComparison {
        threshold,
        basic_steps: steps_to_error(basic, threshold),
        convex_steps: steps_to_error(convex, threshold),
        basic_final_error: last(basic),
        convex_final_error: last(convex),
    }
}
