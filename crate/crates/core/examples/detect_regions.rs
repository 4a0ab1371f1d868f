//! Four-quadrant field: generate, sample, detect with both variants, and
//! report the area error at every step.

use gmrf_regions::gaussian::sample_second_moments;
use gmrf_regions::geometry::{symmetric_difference_area, Rect, RegionLayout};
use gmrf_regions::graphgen::{build_precision, CrossCoupling, GraphParams, SpatialGraph};
use gmrf_regions::gred::{default_zeta, detect, ConvexifyWhen, Frame, GredParams, Variant};

fn main() -> gmrf_regions::Result<()> {
    let args: Vec<u64> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let seed = args.first().copied().unwrap_or(1);
    let n = args.get(1).copied().unwrap_or(5000) as usize;

    let domain = Rect::new(0.0, 0.0, 2.0, 2.0)?;
    let truth = RegionLayout::grid(domain, 2, 2, &[0.04, 0.056, 0.069, 0.08], 0.02, 0.5)?;
    let params = GraphParams {
        domain,
        p: 5000,
        d: 4,
        w_min: 0.006,
        w_max: 0.08,
        seed,
    };
    let graph = SpatialGraph::generate(params, &truth)?;
    let model = build_precision(&graph, CrossCoupling::Mean)?;
    let moments = sample_second_moments(&model, n, seed.wrapping_add(1));

    let mut gp = GredParams::new(0.16, default_zeta(&truth)?, 4, 0.02, 0.5, model.eta());
    gp.known_frame = Some(Frame {
        origin: [0.0, 0.0],
        angle: 0.0,
    });
    println!("zeta = {:.4}, eta = {:.1}, min width = {:.3}", gp.zeta, gp.eta, gp.min_width(graph.p()));

    for variant in [Variant::Basic, Variant::Convex] {
        let result = detect(&moments, &graph.coords, &domain, &gp, variant, ConvexifyWhen::EachIteration)?;
        let seeded = result.seeds.iter().filter(|s| s.region.is_some()).count();
        println!(
            "{variant:?}: {} seeds ({seeded} used), {} regions",
            result.seeds.len(),
            result.layout.regions().len()
        );
        if let Some(d) = &result.diagnostic {
            println!("  {d}");
        }
        for (step, snap) in result.snapshots.iter().enumerate() {
            let layout = snap.to_layout(gp.rho, gp.xi)?;
            let err = symmetric_difference_area(&truth, &layout).total() / truth.total_area();
            println!(
                "  step {step:2} iter {} sub {:2} tau {:.3} regions {} gray {:.3} error {:.3}",
                snap.iteration,
                snap.subiteration,
                snap.tau(),
                snap.estimates.len(),
                snap.gray_area(),
                err
            );
        }
    }
    Ok(())
}
