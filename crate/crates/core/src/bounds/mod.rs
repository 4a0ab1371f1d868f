//! Sample-complexity bounds and the curve functionals they depend on.

mod curve;
mod numeric;
mod theorems;
mod vershik;

pub use curve::{entropy, entropy_in, polygon_prefactor, Affine, CurvePiece, Jet, LogBase, PieceShape, PlaneCurve, VERSHIK_SCALE};
pub use numeric::{brent, integrate, Quadrature};
pub use theorems::{
    gred_sufficient, log_graph_family_lower, mckay_log_count, mckay_regime_ok, theorem1_bound, theorem2_bound, theorem2_bound_with, BoundInputs, GrowthRate,
    RegionBound,
};
pub use vershik::{c_beta, vershik_midpoint, vershik_segment, vershik_y, VershikSegment};
