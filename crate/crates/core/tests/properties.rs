use proptest::prelude::*;

use gmrf_regions::bounds::{polygon_prefactor, Affine, CurvePiece, LogBase, PieceShape, PlaneCurve};
use gmrf_regions::estimation::{estimate_theta, EstimatorConfig};
use gmrf_regions::gaussian::VertexMoments;
use gmrf_regions::geometry::{Cell, Polyomino};

fn ellipse_piece(a: f64, b: f64) -> CurvePiece {
    CurvePiece::new(PieceShape::Ellipse {
        a,
        b,
        t_start: 0.0,
        t_end: 2.0 * std::f64::consts::PI,
    })
}

/// Connected cell set from a lattice walk.
fn walk_polyomino(steps: &[u8]) -> Polyomino {
    let mut c = Cell::new(0, 0);
    let mut cells = vec![c];
    for s in steps {
        let [di, dj] = [[1, 0], [-1, 0], [0, 1], [0, -1]][*s as usize % 4];
        c = c.offset(di, dj);
        cells.push(c);
    }
    Polyomino::new(cells).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn affine_length_ignores_unimodular_maps(a in 0.3f64..3.0, b in 0.3f64..3.0, shear in -2.0f64..2.0) {
        let plain = PlaneCurve::new(vec![ellipse_piece(a, b)]).unwrap().rate_polygon(LogBase::Natural).unwrap().value;
        let sheared = PlaneCurve::new(vec![ellipse_piece(a, b).mapped(Affine::new([[1.0, shear], [0.0, 1.0]], [0.5, -1.0]))])
            .unwrap()
            .rate_polygon(LogBase::Natural)
            .unwrap()
            .value;
        let closed_form = polygon_prefactor() * 2.0 * std::f64::consts::PI * (a * b).cbrt();
        prop_assert!((plain - closed_form).abs() < 1e-7 * closed_form);
        prop_assert!((sheared - plain).abs() < 1e-7 * plain);
    }

    #[test]
    fn staircase_rate_respects_lattice_symmetries(a in 0.3f64..3.0, b in 0.3f64..3.0) {
        let rate = |piece: CurvePiece| PlaneCurve::new(vec![piece]).unwrap().rate_polyomino(LogBase::Two).unwrap().value;
        let base = rate(ellipse_piece(a, b));
        let quarter_turn = rate(ellipse_piece(a, b).mapped(Affine::new([[0.0, -1.0], [1.0, 0.0]], [0.0, 0.0])));
        let mirrored = rate(ellipse_piece(a, b).mapped(Affine::new([[1.0, 0.0], [0.0, -1.0]], [3.0, 0.0])));
        prop_assert!((quarter_turn - base).abs() < 1e-7 * base);
        prop_assert!((mirrored - base).abs() < 1e-7 * base);
        prop_assert!((rate(ellipse_piece(b, a)) - base).abs() < 1e-7 * base);
    }

    #[test]
    fn estimate_ignores_vertex_order(moments in prop::collection::vec(0.5f64..2.0, 10..60), rot in 0usize..60) {
        let source = VertexMoments::new(1000, moments.clone());
        let mut order: Vec<usize> = (0..moments.len()).collect();
        let cfg = EstimatorConfig::default();
        let first = estimate_theta(&source, &order, &cfg).unwrap();
        order.rotate_left(rot % moments.len());
        order.reverse();
        let second = estimate_theta(&source, &order, &cfg).unwrap();
        prop_assert!((first.raw_theta_sq - second.raw_theta_sq).abs() < 1e-12);
        prop_assert!(first.theta_hat >= 0.0);
    }

    #[test]
    fn convexify_is_a_cheaper_superset(steps in prop::collection::vec(0u8..4, 0..30), di in -50i64..50, dj in -50i64..50) {
        let poly = walk_polyomino(&steps);
        let hull = poly.convexify();
        prop_assert!(poly.cells().is_subset(hull.cells()));
        prop_assert!(hull.is_convex());
        prop_assert_eq!(hull.convexify(), hull.clone());
        let (per, area) = poly.perimeter_area(0.5);
        let (hull_per, hull_area) = hull.perimeter_area(0.5);
        prop_assert!(hull_per <= per + 1e-12 && hull_area >= area);
        prop_assert_eq!(poly.translate(di, dj).perimeter_area(0.5), (per, area));
        prop_assert_eq!(poly.translate(di, dj).convexify(), hull.translate(di, dj));
    }
}
