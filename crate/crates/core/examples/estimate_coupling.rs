//! Estimate the coupling of a vertex set from the trace of its sample
//! covariance and compare the spread with the concentration bound.

use std::collections::BTreeMap;

use gmrf_regions::estimation::{concentration_bound, estimate_theta, q_ratio_oracle, EstimatorConfig};
use gmrf_regions::gaussian::sample_second_moments;
use gmrf_regions::graphgen::{random_regular_edges, CrossCoupling, PrecisionModel};
use gmrf_regions::linalg::FactorStrategy;

fn main() -> gmrf_regions::Result<()> {
    let (p, d, theta, k) = (500, 4, 0.08, 128);
    let edges = random_regular_edges(p, d, 1)?;
    let model = PrecisionModel::from_edges(
        p,
        &edges,
        &vec![0; p],
        &BTreeMap::from([(0, theta)]),
        d,
        1.0,
        CrossCoupling::Mean,
        FactorStrategy::default(),
    )?;
    let subset: Vec<usize> = (0..k).collect();
    let target = theta * q_ratio_oracle(&model.to_dense(), &subset, theta, d)?.sqrt();
    let cfg = EstimatorConfig { d, ..Default::default() };
    for n in [500, 5_000, 50_000] {
        let hats: Vec<f64> = (0..40)
            .map(|s| estimate_theta(&sample_second_moments(&model, n, s), &subset, &cfg).map(|e| e.theta_hat))
            .collect::<Result<_, _>>()?;
        let mean = hats.iter().sum::<f64>() / hats.len() as f64;
        let sd = (hats.iter().map(|h| (h - mean).powi(2)).sum::<f64>() / (hats.len() - 1) as f64).sqrt();
        let bound = concentration_bound(n, k, d, theta, theta, 0.01)?;
        println!("n = {n:>6}: mean {mean:.4} (target {target:.4}), sd {sd:.4}, bound on P[|err| >= 0.01] {bound:.2e}");
    }
    Ok(())
}
