//! Greedy region detection on a refining square lattice.
//!
//! Cells of width `tau` are scored with the trace estimator. Seeds are cells
//! whose surrounding corner-touching pattern agrees within `zeta`; regions grow
//! from seeds one cell layer per pass until nothing attaches, then the lattice
//! is refined and growth resumes until the width would drop below
//! `rho (p / eta)^xi`.

mod convex;
mod grow;
mod seeds;

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::estimation::{estimate_theta, EstimatorConfig};
use crate::gaussian::TraceSource;
use crate::geometry::{Cell, Lattice, Point, Polyomino, Rect, Region, RegionLayout};

pub use convex::convexify_assignments;
pub use seeds::Seed;

/// Known lattice anchor and orientation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Frame {
    pub origin: Point,
    pub angle: f64,
}

/// When the convex variant fills row and column gaps.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConvexifyWhen {
    /// After growth settles at every lattice width.
    #[default]
    EachIteration,
    /// Once, after the final width.
    AtEnd,
}

/// Algorithm variant.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    #[default]
    Basic,
    Convex,
}

fn default_refine() -> u32 {
    2
}
fn default_k_min() -> usize {
    10
}
fn default_true() -> bool {
    true
}

/// Corner-touching ring of eight cells around a candidate seed.
pub fn diamond_pattern() -> Vec<(i64, i64)> {
    vec![(0, 2), (0, -2), (2, 0), (-2, 0), (1, 1), (1, -1), (-1, 1), (-1, -1)]
}

/// Detection parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GredParams {
    /// Initial lattice width.
    pub tau0: f64,
    /// Agreement threshold between estimates.
    pub zeta: f64,
    pub d: usize,
    pub rho: f64,
    pub xi: f64,
    /// Vertices per unit area.
    pub eta: f64,
    #[serde(default = "default_refine")]
    pub refine_factor: u32,
    #[serde(default)]
    pub theta_floor: Option<f64>,
    #[serde(default)]
    pub known_frame: Option<Frame>,
    #[serde(default = "default_k_min")]
    pub k_min: usize,
    /// Offsets of the cells compared with a candidate seed, excluding the candidate itself.
    #[serde(default = "diamond_pattern")]
    pub seed_pattern: Vec<(i64, i64)>,
    /// Re-estimate each region over all its vertices after every pass.
    #[serde(default = "default_true")]
    pub update_estimates: bool,
}

impl GredParams {
    pub fn new(tau0: f64, zeta: f64, d: usize, rho: f64, xi: f64, eta: f64) -> Self {
        Self {
            tau0,
            zeta,
            d,
            rho,
            xi,
            eta,
            refine_factor: default_refine(),
            theta_floor: None,
            known_frame: None,
            k_min: default_k_min(),
            seed_pattern: diamond_pattern(),
            update_estimates: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau0 > 0.0 && self.tau0.is_finite()) {
            return Err(invalid(format!("initial width must be positive, got {}", self.tau0)));
        }
        if !(self.zeta > 0.0) {
            return Err(invalid(format!("threshold must be positive, got {}", self.zeta)));
        }
        if self.d == 0 || self.refine_factor < 2 {
            return Err(invalid("need d >= 1 and refine factor >= 2"));
        }
        if !(self.rho > 0.0 && self.eta > 0.0 && self.xi > 0.0 && self.xi <= 0.5) {
            return Err(invalid("rho and eta must be positive and xi in (0, 1/2]"));
        }
        if self.seed_pattern.is_empty() || self.seed_pattern.contains(&(0, 0)) {
            return Err(invalid("seed pattern must be nonempty and exclude the center"));
        }
        Ok(())
    }

    /// Smallest width the lattice may be refined to.
    pub fn min_width(&self, p: usize) -> f64 {
        self.rho * (p as f64 / self.eta).powf(self.xi)
    }

    pub fn estimator(&self) -> EstimatorConfig {
        EstimatorConfig {
            d: self.d,
            floor: self.theta_floor,
            k_min: self.k_min,
        }
    }

    fn lattice(&self, domain: &Rect) -> Result<Lattice> {
        match self.known_frame {
            Some(f) => Lattice::new(f.origin, f.angle, self.tau0),
            None => Lattice::axis_aligned([domain.x0, domain.y0], self.tau0),
        }
    }
}

/// Pairs of labels whose regions share a lattice edge.
pub fn adjacent_pairs(layout: &RegionLayout) -> Vec<(u32, u32)> {
    let mut out = BTreeSet::new();
    for r in layout.regions() {
        for c in r.cells.cells() {
            for n in c.edge_neighbors() {
                if let Some(l) = layout.label_of_cell(n) {
                    if l != r.label {
                        out.insert((r.label.min(l), r.label.max(l)));
                    }
                }
            }
        }
    }
    out.into_iter().collect()
}

/// Initial width from ground truth: a third of the smallest area-to-perimeter ratio.
pub fn default_tau0(layout: &RegionLayout) -> Result<f64> {
    let w = layout.lattice().width();
    layout
        .regions()
        .iter()
        .map(|r| {
            let (perim, area) = r.cells.perimeter_area(w);
            area / perim / 3.0
        })
        .min_by(f64::total_cmp)
        .ok_or_else(|| invalid("layout has no regions"))
}

/// Threshold from ground truth: half the smallest coupling gap across a shared boundary.
pub fn default_zeta(layout: &RegionLayout) -> Result<f64> {
    let theta = |l: u32| layout.region(l).map(|r| r.theta).unwrap_or(f64::NAN);
    adjacent_pairs(layout)
        .into_iter()
        .map(|(a, b)| (theta(a) - theta(b)).abs() / 2.0)
        .min_by(f64::total_cmp)
        .filter(|z| *z > 0.0)
        .ok_or_else(|| invalid("no adjacent regions with distinct couplings"))
}

mod assignment_list {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(m: &BTreeMap<Cell, u32>, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(m.iter())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<BTreeMap<Cell, u32>, D::Error> {
        Ok(Vec::<(Cell, u32)>::deserialize(d)?.into_iter().collect())
    }
}

/// Assignment of lattice cells to detected regions at one step.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetectionState {
    /// Lattice refinement count.
    pub iteration: usize,
    /// Growth passes applied at this width; 0 is the state on entry.
    pub subiteration: usize,
    pub lattice: Lattice,
    pub domain: Rect,
    #[serde(with = "assignment_list")]
    pub assignments: BTreeMap<Cell, u32>,
    /// Current coupling estimate per region id.
    pub estimates: BTreeMap<u32, f64>,
}

impl DetectionState {
    /// Lattice with no assignments.
    pub fn empty(lattice: Lattice, domain: Rect) -> Self {
        Self {
            iteration: 0,
            subiteration: 0,
            lattice,
            domain,
            assignments: BTreeMap::new(),
            estimates: BTreeMap::new(),
        }
    }

    pub fn tau(&self) -> f64 {
        self.lattice.width()
    }

    /// Every cell that intersects the domain.
    pub fn universe(&self) -> Vec<Cell> {
        self.lattice.cells_covering(&self.domain)
    }

    pub fn gray_cells(&self) -> Vec<Cell> {
        self.universe().into_iter().filter(|c| !self.assignments.contains_key(c)).collect()
    }

    /// Cells of each region.
    pub fn region_cells(&self) -> BTreeMap<u32, BTreeSet<Cell>> {
        group(&self.assignments)
    }

    /// Area of the domain not covered by any region.
    pub fn gray_area(&self) -> f64 {
        self.gray_cells()
            .iter()
            .map(|&c| self.lattice.cell_area_within(c, &self.domain))
            .fold(0.0, |a, b| a + b)
    }

    /// Detected regions as a layout clipped to the domain.
    pub fn to_layout(&self, rho: f64, xi: f64) -> Result<RegionLayout> {
        let regions = self
            .region_cells()
            .into_iter()
            .map(|(id, cells)| {
                Ok(Region {
                    label: id,
                    theta: self.estimates.get(&id).copied().unwrap_or(0.0),
                    cells: Polyomino::new(cells)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        RegionLayout::new(self.lattice, regions, rho, xi, Some(self.domain))
    }
}

pub(crate) fn group(assignments: &BTreeMap<Cell, u32>) -> BTreeMap<u32, BTreeSet<Cell>> {
    let mut out: BTreeMap<u32, BTreeSet<Cell>> = BTreeMap::new();
    for (&c, &r) in assignments {
        out.entry(r).or_default().insert(c);
    }
    out
}

/// Outcome of a detection run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetectionResult {
    pub state: DetectionState,
    pub layout: RegionLayout,
    pub gray: Vec<Cell>,
    pub seeds: Vec<Seed>,
    /// Every recorded step, starting with the seeds.
    pub snapshots: Vec<DetectionState>,
    /// Why the run produced no regions, if it did not.
    pub diagnostic: Option<String>,
}

/// Vertex bins and cell estimates at one lattice width.
pub(crate) struct Level {
    pub universe: BTreeSet<Cell>,
    pub bins: HashMap<Cell, Vec<usize>>,
    pub cell_theta: HashMap<Cell, f64>,
}

impl Level {
    fn build<S: TraceSource + ?Sized>(lattice: &Lattice, domain: &Rect, coords: &[Point], source: &S, est: &EstimatorConfig) -> Result<Self> {
        let universe: BTreeSet<Cell> = lattice.cells_covering(domain).into_iter().collect();
        let mut bins: HashMap<Cell, Vec<usize>> = HashMap::new();
        for (v, &pt) in coords.iter().enumerate() {
            let c = lattice.cell_of(pt);
            if universe.contains(&c) {
                bins.entry(c).or_default().push(v);
            }
        }
        let cells: Vec<Cell> = universe.iter().copied().collect();
        let scored: Vec<Option<(Cell, f64)>> = cells
            .par_iter()
            .map(|&c| {
                let verts = bins.get(&c).map(Vec::as_slice).unwrap_or(&[]);
                match estimate_theta(source, verts, est) {
                    Ok(e) => Ok(Some((c, e.theta_hat))),
                    Err(Error::Unresolvable { .. }) => Ok(None),
                    Err(e) => Err(e),
                }
            })
            .collect::<Result<_>>()?;
        Ok(Self {
            universe,
            bins,
            cell_theta: scored.into_iter().flatten().collect(),
        })
    }

    /// Estimate pooled over the vertices of `cells`; `None` if too few vertices.
    fn pooled<'a, S: TraceSource + ?Sized>(&self, cells: impl IntoIterator<Item = &'a Cell>, source: &S, est: &EstimatorConfig) -> Result<Option<f64>> {
        let verts: Vec<usize> = cells.into_iter().filter_map(|c| self.bins.get(c)).flatten().copied().collect();
        match estimate_theta(source, &verts, est) {
            Ok(e) => Ok(Some(e.theta_hat)),
            Err(Error::Unresolvable { .. }) => Ok(None),
            Err(e) => Err(e),
        }
    }

    fn refresh_estimates<S: TraceSource + ?Sized>(
        &self,
        state: &mut DetectionState,
        only: Option<&BTreeSet<u32>>,
        source: &S,
        est: &EstimatorConfig,
    ) -> Result<()> {
        let groups = state.region_cells();
        state.estimates.retain(|id, _| groups.contains_key(id));
        for (id, cells) in &groups {
            if only.is_some_and(|o| !o.contains(id)) {
                continue;
            }
            if let Some(t) = self.pooled(cells, source, est)? {
                state.estimates.insert(*id, t);
            }
        }
        Ok(())
    }
}

const MAX_PASSES_PER_LEVEL: usize = 100_000;

/// Runs detection; `coords[v]` is the position of vertex `v` in `source`.
pub fn detect<S: TraceSource + ?Sized>(
    source: &S,
    coords: &[Point],
    domain: &Rect,
    params: &GredParams,
    variant: Variant,
    when: ConvexifyWhen,
) -> Result<DetectionResult> {
    params.validate()?;
    if coords.len() != source.dim() {
        return Err(Error::DimensionMismatch(coords.len(), source.dim()));
    }
    let est = params.estimator();
    let p = coords.len();
    let min_width = params.min_width(p);
    let mut lattice = params.lattice(domain)?;
    let mut level = Level::build(&lattice, domain, coords, source, &est)?;
    let mut state = DetectionState::empty(lattice, *domain);
    let seeds = seeds::seed_scan(&level, params, source, &mut state)?;
    let mut snapshots = vec![state.clone()];
    if state.assignments.is_empty() {
        let layout = state.to_layout(params.rho, params.xi)?;
        let gray = state.gray_cells();
        let msg = format!("no seeds at width {}: no candidate pattern agreed within {:.4}", params.tau0, params.zeta);
        return Ok(DetectionResult {
            state,
            layout,
            gray,
            seeds,
            snapshots,
            diagnostic: Some(msg),
        });
    }
    let convex = variant == Variant::Convex;
    loop {
        for _ in 0..MAX_PASSES_PER_LEVEL {
            if !grow::grow_pass(&level, &mut state, params, source)? {
                break;
            }
            state.subiteration += 1;
            snapshots.push(state.clone());
        }
        if convex && when == ConvexifyWhen::EachIteration && apply_convex(&level, &mut state, params, source)? {
            state.subiteration += 1;
            snapshots.push(state.clone());
        }
        let next = lattice.width() / params.refine_factor as f64;
        if next < min_width * (1.0 - 1e-9) {
            break;
        }
        lattice = lattice.refined(params.refine_factor);
        level = Level::build(&lattice, domain, coords, source, &est)?;
        refine(&mut state, &lattice, &level, params.refine_factor);
        if params.update_estimates {
            level.refresh_estimates(&mut state, None, source, &est)?;
        }
        snapshots.push(state.clone());
    }
    if convex && when == ConvexifyWhen::AtEnd && apply_convex(&level, &mut state, params, source)? {
        state.subiteration += 1;
        snapshots.push(state.clone());
    }
    let layout = state.to_layout(params.rho, params.xi)?;
    let gray = state.gray_cells();
    Ok(DetectionResult {
        state,
        layout,
        gray,
        seeds,
        snapshots,
        diagnostic: None,
    })
}

/// Basic variant.
pub fn run_basic<S: TraceSource + ?Sized>(source: &S, coords: &[Point], domain: &Rect, params: &GredParams) -> Result<DetectionResult> {
    detect(source, coords, domain, params, Variant::Basic, ConvexifyWhen::EachIteration)
}

/// Convex variant.
pub fn run_convex<S: TraceSource + ?Sized>(source: &S, coords: &[Point], domain: &Rect, params: &GredParams, when: ConvexifyWhen) -> Result<DetectionResult> {
    detect(source, coords, domain, params, Variant::Convex, when)
}

fn apply_convex<S: TraceSource + ?Sized>(level: &Level, state: &mut DetectionState, params: &GredParams, source: &S) -> Result<bool> {
    let changed = convexify_assignments(&mut state.assignments, &level.universe);
    if changed {
        level.refresh_estimates(state, None, source, &params.estimator())?;
    }
    Ok(changed)
}

/// Moves `state` onto the refined lattice; children inherit their parent's region.
fn refine(state: &mut DetectionState, fine: &Lattice, level: &Level, factor: u32) {
    let assignments = state
        .assignments
        .iter()
        .flat_map(|(&c, &r)| c.children(factor).map(move |ch| (ch, r)))
        .filter(|(ch, _)| level.universe.contains(ch))
        .collect();
    state.assignments = assignments;
    state.lattice = *fine;
    state.iteration += 1;
    state.subiteration = 0;
}

#[cfg(test)]
mod tests;
