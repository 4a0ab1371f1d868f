//! Necessary and sufficient sample counts for the four-quadrant setting, and
//! the shape constants behind them.

use gmrf_regions::bounds::{c_beta, gred_sufficient, theorem1_bound, theorem2_bound, vershik_segment, BoundInputs, LogBase, RegionBound};

fn main() -> gmrf_regions::Result<()> {
    for beta in [4.2, 4.5, 5.0, 5.6] {
        let seg = vershik_segment(beta)?;
        println!(
            "beta {beta}: segment a {:.4}, b {:.4}, C(beta) {:.4}",
            seg.a,
            seg.b,
            c_beta(beta, LogBase::Natural)?
        );
    }
    let regions = [0.04, 0.056, 0.069, 0.08]
        .iter()
        .map(|&theta| RegionBound { theta, beta: 4.5, nu: 0.25 })
        .collect();
    let inputs = BoundInputs {
        p: 1e3,
        d: 4,
        xi: 0.5,
        rho: 0.02,
        eta: 1250.0,
        phi: 0.5,
        regions,
        adjacency: vec![(0, 1), (0, 2), (1, 3), (2, 3)],
        log_base: LogBase::Natural,
    };
    println!("{:>8} {:>12} {:>12} {:>12}", "p", "any graph", "regions", "detector");
    for p in [1e3, 1e4, 1e5, 1e6, 1e7] {
        let at = inputs.with_p(p);
        let t1 = theorem1_bound(p, 4, at.theta_bar(), 0.5)?;
        println!("{p:>8.0e} {t1:>12.3e} {:>12.3e} {:>12.3e}", theorem2_bound(&at)?, gred_sufficient(&at)?.value);
    }
    Ok(())
}
