//! Scatter vertices with a minimum separation, wire nearest neighbours up to a
//! degree budget and check the modelling assumptions.

use gmrf_regions::geometry::{Rect, RegionLayout};
use gmrf_regions::graphgen::{build_precision, validate_assumptions, CrossCoupling, GraphParams, SpatialGraph};

fn main() -> gmrf_regions::Result<()> {
    let domain = Rect::new(0.0, 0.0, 2.0, 2.0)?;
    let truth = RegionLayout::grid(domain, 2, 2, &[0.04, 0.056, 0.069, 0.08], 0.02, 0.5)?;
    for w_max in [0.03, 0.08] {
        let graph = SpatialGraph::generate(
            GraphParams {
                domain,
                p: 5000,
                d: 4,
                w_min: 0.006,
                w_max,
                seed: 1,
            },
            &truth,
        )?;
        let model = build_precision(&graph, CrossCoupling::Mean)?;
        let report = validate_assumptions(&graph, &truth, &model);
        println!(
            "w_max {w_max}: degrees 0..=4 {:?}, {:.1}% at budget, crossing ratio {:.2}, d*theta_bar {:.2}",
            report.degree_histogram,
            100.0 * report.fraction_at_budget,
            report.max_crossing_ratio,
            report.correlation_decay
        );
    }
    Ok(())
}
