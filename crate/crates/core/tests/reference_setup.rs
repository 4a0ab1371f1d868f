//! Checks on the four-quadrant reference configuration and its sampler.

use std::collections::BTreeMap;

use gmrf_regions::bounds::{mckay_log_count, mckay_regime_ok};
use gmrf_regions::gaussian::sample;
use gmrf_regions::geometry::{Rect, RegionLayout};
use gmrf_regions::graphgen::{build_precision, generate_vertices, validate_assumptions, CrossCoupling, GraphParams, PrecisionModel, SpatialGraph};
use gmrf_regions::linalg::FactorStrategy;

const THETAS: [f64; 4] = [0.04, 0.056, 0.069, 0.08];

fn quadrants() -> (Rect, RegionLayout) {
    let domain = Rect::new(0.0, 0.0, 2.0, 2.0).unwrap();
    (domain, RegionLayout::grid(domain, 2, 2, &THETAS, 0.02, 0.5).unwrap())
}

#[test]
fn dense_placement_keeps_minimum_separation() {
    let (domain, _) = quadrants();
    let pts = generate_vertices(&domain, 20_000, 0.003, 5).unwrap();
    assert_eq!(pts.len(), 20_000);
    // grid hashing at the separation radius makes the all-pairs check cheap
    let mut buckets: BTreeMap<(i64, i64), Vec<usize>> = BTreeMap::new();
    for (i, p) in pts.iter().enumerate() {
        buckets.entry(((p[0] / 0.003) as i64, (p[1] / 0.003) as i64)).or_default().push(i);
    }
    for (&(bx, by), members) in &buckets {
        for &i in members {
            for dx in -1..=1 {
                for dy in -1..=1 {
                    for &j in buckets.get(&(bx + dx, by + dy)).into_iter().flatten() {
                        if i < j {
                            let d = (pts[i][0] - pts[j][0]).hypot(pts[i][1] - pts[j][1]);
                            assert!(d >= 0.003, "points {i} and {j} only {d} apart");
                        }
                    }
                }
            }
        }
    }
    assert_eq!(pts, generate_vertices(&domain, 20_000, 0.003, 5).unwrap());
}

#[test]
fn reference_graph_meets_the_modelling_assumptions() {
    let (domain, truth) = quadrants();
    let params = GraphParams {
        domain,
        p: 10_000,
        d: 4,
        w_min: 0.006,
        w_max: 0.08,
        seed: 3,
    };
    let graph = SpatialGraph::generate(params, &truth).unwrap();
    let model = build_precision(&graph, CrossCoupling::Mean).unwrap();
    let report = validate_assumptions(&graph, &truth, &model);
    assert!(report.fraction_at_budget >= 0.9, "{:?}", report.degree_histogram);
    assert!(report.correlation_decay_ok && (report.correlation_decay - 0.32).abs() < 1e-12);
    assert!(report.locality_ok && report.max_crossing_ratio < 2.0, "{report:?}");

    // occupancy tracks area: p_s = eta A_s within 5%
    let eta = graph.p() as f64 / domain.area();
    for region in truth.regions() {
        let count = graph.labels.iter().filter(|&&l| l == region.label).count() as f64;
        let expected = eta * truth.area(region);
        assert!((count - expected).abs() / count <= 0.05, "region {}: {count} vs {expected}", region.label);
    }
}

#[test]
fn two_vertex_covariance_matches_closed_form() {
    let model = PrecisionModel::from_edges(
        2,
        &[(0, 1)],
        &[0, 0],
        &BTreeMap::from([(0, 0.1)]),
        1,
        1.0,
        CrossCoupling::Mean,
        FactorStrategy::default(),
    )
    .unwrap();
    let cov = sample(&model, 1_000_000, 9).covariance();
    let exact = [[1.0 / 0.99, -0.1 / 0.99], [-0.1 / 0.99, 1.0 / 0.99]];
    for (i, row) in exact.iter().enumerate() {
        for (j, &e) in row.iter().enumerate() {
            // 1% of the variance scale: an off-diagonal entry of 0.1 has sampling sd near 1e-3 at this n
            assert!((cov[(i, j)] - e).abs() <= 0.01 * exact[0][0], "entry ({i},{j}): {} vs {e}", cov[(i, j)]);
        }
    }
}

#[test]
fn regular_graph_count_outside_its_regime() {
    // K4 is the only 3-regular graph on 4 labelled vertices, so the exact log count is 0
    let approx = mckay_log_count(4, 3).unwrap_or(f64::NAN);
    assert!(!mckay_regime_ok(4, 3));
    println!("log count of 3-regular graphs on 4 vertices: asymptotic {approx:.3}, exact 0");
}

#[test]
fn boundary_kl_bound_covers_exact_divergence() {
    // 10 x 10 torus on the unit square; moving the strip boundary by one column
    // relabels 10 vertices, an area of 0.1 at density 100
    let (w, d, eta) = (10usize, 4usize, 100.0);
    let edges = gmrf_regions::graphgen::torus_edges(w, w);
    let thetas = BTreeMap::from([(0u32, 0.1), (1u32, 0.05)]);
    let labels = |split: usize| (0..w * w).map(|v| u32::from(v % w >= split)).collect::<Vec<_>>();
    let model = |split| PrecisionModel::from_edges(w * w, &edges, &labels(split), &thetas, d, eta, CrossCoupling::Mean, FactorStrategy::default()).unwrap();
    for moved in 1..=3 {
        let exact = gmrf_regions::gaussian::sym_kl(&model(5), &model(5 + moved)).unwrap();
        let bound = gmrf_regions::gaussian::sym_kl_boundary_bound(0.1, 0.05, d, 0.1, eta, moved as f64 * 0.1).unwrap();
        assert!(exact <= bound, "moved {moved}: exact {exact} > bound {bound}");
    }
}
