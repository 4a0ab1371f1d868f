use super::*;
use crate::gaussian::VertexMoments;

const D: usize = 4;

fn domain() -> Rect {
    Rect::new(0.0, 0.0, 2.0, 2.0).unwrap()
}

/// Grid of points with spacing 0.02 and exact per-vertex moments `1 + d theta^2`.
fn field(theta: impl Fn(Point) -> f64) -> (Vec<Point>, VertexMoments) {
    let coords: Vec<Point> = (0..100)
        .flat_map(|i| (0..100).map(move |j| [0.01 + 0.02 * i as f64, 0.01 + 0.02 * j as f64]))
        .collect();
    let m = coords.iter().map(|&pt| 1.0 + D as f64 * theta(pt).powi(2)).collect();
    (coords, VertexMoments::new(1000, m))
}

fn params() -> GredParams {
    let mut p = GredParams::new(0.16, 0.01, D, 0.02, 0.5, 2500.0);
    p.k_min = 4;
    p
}

fn split(pt: Point) -> f64 {
    if pt[0] < 0.96 {
        0.04
    } else {
        0.08
    }
}

#[test]
fn homogeneous_field_is_one_region() {
    let (coords, m) = field(|_| 0.05);
    let r = run_basic(&m, &coords, &domain(), &params()).unwrap();
    assert_eq!(r.layout.regions().len(), 1);
    assert!(r.gray.is_empty());
    assert!((r.layout.regions()[0].theta - 0.05).abs() < 1e-12);
}

#[test]
fn two_strips_recovered_exactly() {
    let (coords, m) = field(split);
    let r = run_basic(&m, &coords, &domain(), &params()).unwrap();
    assert!(r.diagnostic.is_none());
    assert_eq!(r.layout.regions().len(), 2);
    let lat = &r.state.lattice;
    for (&c, &id) in &r.state.assignments {
        let centre = lat.cell_center(c);
        let theta = r.state.estimates[&id];
        assert!((theta - split(centre)).abs() < 1e-12, "cell {c:?}");
    }
    assert!(r.gray.is_empty());
    // seed, one growth level, then two refinements
    assert_eq!(r.snapshots.last().unwrap().iteration, 2);
    assert!((r.state.tau() - 0.04).abs() < 1e-12);
}

#[test]
fn refinement_quadruples_assignments() {
    let (coords, m) = field(split);
    let r = run_basic(&m, &coords, &domain(), &params()).unwrap();
    let at = |t: usize| r.snapshots.iter().find(|s| s.iteration == t).unwrap().assignments.len();
    // the top row and right column of coarse cells straddle the domain edge
    assert!(at(0) > 0);
    let full0 = r.snapshots.iter().rfind(|s| s.iteration == 0).unwrap().assignments.len();
    assert_eq!(full0, 13 * 13);
    assert_eq!(at(1), 25 * 25);
}

#[test]
fn enclosed_outlier_attaches() {
    let odd = |pt: Point| {
        if (0.48..0.64).contains(&pt[0]) && (0.48..0.64).contains(&pt[1]) {
            0.2
        } else {
            split(pt)
        }
    };
    let (coords, m) = field(odd);
    let r = run_basic(&m, &coords, &domain(), &params()).unwrap();
    let c = r.state.lattice.cell_of([0.55, 0.55]);
    let left = r.state.assignments[&r.state.lattice.cell_of([0.1, 0.1])];
    assert_eq!(r.state.assignments.get(&c), Some(&left));
}

#[test]
fn striped_field_has_no_seeds() {
    let (coords, m) = field(|pt| if ((pt[0] / 0.16) as i64) % 2 == 0 { 0.02 } else { 0.1 });
    let r = run_basic(&m, &coords, &domain(), &params()).unwrap();
    assert!(r.layout.regions().is_empty());
    assert!(r.diagnostic.is_some());
    assert_eq!(r.snapshots.len(), 1);
}

#[test]
fn convex_variant_keeps_convex_truth() {
    let (coords, m) = field(split);
    let basic = run_basic(&m, &coords, &domain(), &params()).unwrap();
    let convex = run_convex(&m, &coords, &domain(), &params(), ConvexifyWhen::EachIteration).unwrap();
    assert_eq!(basic.state.assignments, convex.state.assignments);
}

#[test]
fn convex_variant_emits_convex_regions() {
    // an upside-down U around a pocket
    let u = |pt: Point| {
        let inside_u = pt[0] < 0.48 || pt[0] >= 1.44 || pt[1] >= 1.44;
        if inside_u {
            0.08
        } else {
            0.03
        }
    };
    let (coords, m) = field(u);
    for when in [ConvexifyWhen::EachIteration, ConvexifyWhen::AtEnd] {
        let r = run_convex(&m, &coords, &domain(), &params(), when).unwrap();
        assert!(!r.layout.regions().is_empty());
        for reg in r.layout.regions() {
            assert!(reg.cells.is_convex(), "{when:?}");
        }
    }
    let basic = run_basic(&m, &coords, &domain(), &params()).unwrap();
    assert!(basic.layout.regions().iter().any(|r| !r.cells.is_convex()));
}

#[test]
fn gray_and_assigned_partition_the_universe() {
    let (coords, m) = field(|pt| if pt[0] + pt[1] < 2.0 { 0.04 } else { 0.08 });
    let r = run_basic(&m, &coords, &domain(), &params()).unwrap();
    for s in &r.snapshots {
        let universe = s.universe();
        let gray = s.gray_cells();
        assert_eq!(gray.len() + s.assignments.len(), universe.len());
        for (_, cells) in s.region_cells() {
            assert!(crate::geometry::is_edge_connected(&cells));
        }
    }
}

#[test]
fn deterministic_and_serializable() {
    let (coords, m) = field(|pt| if pt[0] + pt[1] < 2.0 { 0.04 } else { 0.08 });
    let a = run_basic(&m, &coords, &domain(), &params()).unwrap();
    let b = run_basic(&m, &coords, &domain(), &params()).unwrap();
    assert_eq!(a, b);
    let json = serde_json::to_string(&a.state).unwrap();
    let back: DetectionState = serde_json::from_str(&json).unwrap();
    assert_eq!(back, a.state);
}

#[test]
fn defaults_from_truth() {
    let layout = RegionLayout::grid(domain(), 2, 2, &[0.04, 0.056, 0.069, 0.08], 0.02, 0.5).unwrap();
    assert!((default_tau0(&layout).unwrap() - 1.0 / 12.0).abs() < 1e-12);
    assert!((default_zeta(&layout).unwrap() - 0.0055).abs() < 1e-12);
    assert_eq!(adjacent_pairs(&layout), vec![(0, 1), (0, 2), (1, 3), (2, 3)]);
}

#[test]
fn rejects_bad_params() {
    let (coords, m) = field(split);
    let mut p = params();
    p.zeta = 0.0;
    assert!(run_basic(&m, &coords, &domain(), &p).is_err());
    assert!(run_basic(&m, &coords[1..], &domain(), &params()).is_err());
}
