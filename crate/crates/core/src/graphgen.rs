//! Spatially embedded graphs, region labels and the precision matrix.
//!
//! Vertices are thinned uniform points: a candidate closer than `w_min` to an
//! accepted point is rejected. Edges are added vertex by vertex in listing
//! order, nearest neighbour first, within radius `w_max`, and only while both
//! endpoints are below the degree budget `d`.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::sync::Arc;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geometry::{Point, Rect, RegionLayout};
use crate::linalg::{self, Factor, FactorStrategy, SymmetricSparse};

/// Bucket grid for radius queries.
struct SpatialHash {
    cell: f64,
    origin: Point,
    buckets: HashMap<(i64, i64), Vec<usize>>,
}

impl SpatialHash {
    fn new(origin: Point, cell: f64) -> Self {
        Self {
            cell,
            origin,
            buckets: HashMap::new(),
        }
    }

    fn key(&self, p: Point) -> (i64, i64) {
        (
            ((p[0] - self.origin[0]) / self.cell).floor() as i64,
            ((p[1] - self.origin[1]) / self.cell).floor() as i64,
        )
    }

    fn insert(&mut self, idx: usize, p: Point) {
        let k = self.key(p);
        self.buckets.entry(k).or_default().push(idx);
    }

    /// Indices within distance `r <= cell` of `p`, in bucket order.
    fn near(&self, p: Point, r: f64, coords: &[Point], out: &mut Vec<(f64, usize)>) {
        out.clear();
        let (ki, kj) = self.key(p);
        for di in -1..=1 {
            for dj in -1..=1 {
                if let Some(b) = self.buckets.get(&(ki + di, kj + dj)) {
                    for &q in b {
                        let d = dist(p, coords[q]);
                        if d <= r {
                            out.push((d, q));
                        }
                    }
                }
            }
        }
    }
}

fn dist(a: Point, b: Point) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// Draws `p` points uniformly in `domain`, rejecting candidates closer than `w_min`
/// to an accepted point.
pub fn generate_vertices(domain: &Rect, p: usize, w_min: f64, seed: u64) -> Result<Vec<Point>> {
    if !(w_min >= 0.0 && w_min.is_finite()) {
        return Err(invalid("w_min must be finite and nonnegative"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bucket = if w_min > 0.0 { w_min } else { domain.width().max(domain.height()) };
    let mut hash = SpatialHash::new([domain.x0, domain.y0], bucket);
    let mut coords: Vec<Point> = Vec::with_capacity(p);
    let limit = 1000usize.saturating_mul(p.max(1));
    let mut rejections = 0usize;
    let mut scratch = Vec::new();
    while coords.len() < p {
        let q = [rng.random_range(domain.x0..domain.x1), rng.random_range(domain.y0..domain.y1)];
        let ok = if w_min > 0.0 {
            hash.near(q, w_min, &coords, &mut scratch);
            scratch.iter().all(|&(d, _)| d >= w_min)
        } else {
            true
        };
        if ok {
            hash.insert(coords.len(), q);
            coords.push(q);
            rejections = 0;
        } else {
            rejections += 1;
            if rejections >= limit {
                return Err(Error::Saturation(rejections));
            }
        }
    }
    Ok(coords)
}

/// Sequential nearest-first wiring under a shared degree budget `d`.
pub fn connect_vertices(coords: &[Point], d: usize, w_max: f64) -> Vec<(usize, usize)> {
    if coords.is_empty() || d == 0 || !(w_max > 0.0) {
        return Vec::new();
    }
    let x0 = coords.iter().map(|c| c[0]).fold(f64::INFINITY, f64::min);
    let y0 = coords.iter().map(|c| c[1]).fold(f64::INFINITY, f64::min);
    let mut hash = SpatialHash::new([x0, y0], w_max);
    for (i, &c) in coords.iter().enumerate() {
        hash.insert(i, c);
    }
    let mut degree = vec![0usize; coords.len()];
    let mut linked: HashSet<(usize, usize)> = HashSet::new();
    let mut edges = Vec::new();
    let mut near = Vec::new();
    for i in 0..coords.len() {
        if degree[i] >= d {
            continue;
        }
        hash.near(coords[i], w_max, coords, &mut near);
        near.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        for &(_, j) in &near {
            if degree[i] >= d {
                break;
            }
            if j == i || degree[j] >= d {
                continue;
            }
            let key = (i.min(j), i.max(j));
            if linked.insert(key) {
                edges.push(key);
                degree[i] += 1;
                degree[j] += 1;
            }
        }
    }
    edges
}

/// Count of vertices per degree, index = degree.
pub fn degree_histogram(degrees: &[usize]) -> Vec<usize> {
    let max = degrees.iter().copied().max().unwrap_or(0);
    let mut h = vec![0; max + 1];
    for &k in degrees {
        h[k] += 1;
    }
    h
}

/// Labels each point with the region containing it.
pub fn assign_regions(coords: &[Point], layout: &RegionLayout) -> Result<Vec<u32>> {
    coords.iter().map(|&p| layout.region_at(p).ok_or(Error::UncoveredPoint(p[0], p[1]))).collect()
}

/// Generation parameters for a spatial graph.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphParams {
    pub domain: Rect,
    pub p: usize,
    pub d: usize,
    pub w_min: f64,
    pub w_max: f64,
    pub seed: u64,
}

/// Vertices with coordinates, undirected edges and region labels.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpatialGraph {
    pub params: GraphParams,
    pub coords: Vec<Point>,
    pub edges: Vec<(usize, usize)>,
    pub labels: Vec<u32>,
    pub thetas: BTreeMap<u32, f64>,
}

impl SpatialGraph {
    /// Validates and assembles a graph.
    pub fn new(params: GraphParams, coords: Vec<Point>, edges: Vec<(usize, usize)>, labels: Vec<u32>, thetas: BTreeMap<u32, f64>) -> Result<Self> {
        let p = coords.len();
        if labels.len() != p {
            return Err(Error::DimensionMismatch(labels.len(), p));
        }
        if let Some(q) = coords.iter().find(|&&q| !params.domain.contains(q)) {
            return Err(invalid(format!("vertex ({}, {}) outside the domain", q[0], q[1])));
        }
        let mut seen = HashSet::new();
        let mut degree = vec![0usize; p];
        for &(a, b) in &edges {
            if a == b || a >= p || b >= p {
                return Err(invalid(format!("bad edge ({a}, {b})")));
            }
            if !seen.insert((a.min(b), a.max(b))) {
                return Err(invalid(format!("duplicate edge ({a}, {b})")));
            }
            degree[a] += 1;
            degree[b] += 1;
        }
        if let Some(i) = degree.iter().position(|&k| k > params.d) {
            return Err(invalid(format!("vertex {i} has degree {} > {}", degree[i], params.d)));
        }
        if let Some(l) = labels.iter().find(|l| !thetas.contains_key(l)) {
            return Err(invalid(format!("no theta for region label {l}")));
        }
        Ok(Self {
            params,
            coords,
            edges,
            labels,
            thetas,
        })
    }

    /// Full pipeline: thinned vertices, sequential wiring, labels from `layout`.
    pub fn generate(params: GraphParams, layout: &RegionLayout) -> Result<Self> {
        let coords = generate_vertices(&params.domain, params.p, params.w_min, params.seed)?;
        let edges = connect_vertices(&coords, params.d, params.w_max);
        let labels = assign_regions(&coords, layout)?;
        let thetas = layout.regions().iter().map(|r| (r.label, r.theta)).collect();
        Self::new(params, coords, edges, labels, thetas)
    }

    pub fn p(&self) -> usize {
        self.coords.len()
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.p()];
        for &(a, b) in &self.edges {
            deg[a] += 1;
            deg[b] += 1;
        }
        deg
    }

    /// Vertices per unit area.
    pub fn density(&self) -> f64 {
        self.p() as f64 / self.params.domain.area()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let g: SpatialGraph = serde_json::from_str(s)?;
        Self::new(g.params, g.coords, g.edges, g.labels, g.thetas)
    }
}

/// Coupling assigned to an edge between two regions.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CrossCoupling {
    /// `(theta_a + theta_b) / 2`
    #[default]
    Mean,
    /// `theta_a + theta_b`
    Sum,
}

impl CrossCoupling {
    pub fn value(self, a: f64, b: f64) -> f64 {
        match self {
            CrossCoupling::Mean => 0.5 * (a + b),
            CrossCoupling::Sum => a + b,
        }
    }
}

/// Sparse precision matrix `J = I + sum_s theta_s E_s` with its factor.
#[derive(Clone, Debug)]
pub struct PrecisionModel {
    rows: Vec<Vec<(usize, f64)>>,
    thetas: BTreeMap<u32, f64>,
    d: usize,
    eta: f64,
    factor: Arc<Factor>,
}

impl SymmetricSparse for PrecisionModel {
    fn dim(&self) -> usize {
        self.rows.len()
    }
    fn diagonal(&self, _: usize) -> f64 {
        1.0
    }
    fn row(&self, i: usize) -> &[(usize, f64)] {
        &self.rows[i]
    }
}

/// Off-diagonal rows before factorization.
struct RawRows<'a>(&'a [Vec<(usize, f64)>]);

impl SymmetricSparse for RawRows<'_> {
    fn dim(&self) -> usize {
        self.0.len()
    }
    fn diagonal(&self, _: usize) -> f64 {
        1.0
    }
    fn row(&self, i: usize) -> &[(usize, f64)] {
        &self.0[i]
    }
}

impl PrecisionModel {
    /// Assembles and factors `J` from an edge list.
    ///
    /// `d` is the degree budget used in the correlation-decay check `d * theta_bar < 1`.
    #[allow(clippy::too_many_arguments)]
    pub fn from_edges(
        p: usize,
        edges: &[(usize, usize)],
        labels: &[u32],
        thetas: &BTreeMap<u32, f64>,
        d: usize,
        eta: f64,
        rule: CrossCoupling,
        strategy: FactorStrategy,
    ) -> Result<Self> {
        if labels.len() != p {
            return Err(Error::DimensionMismatch(labels.len(), p));
        }
        if thetas.is_empty() || thetas.values().any(|&t| !(t > 0.0 && t.is_finite())) {
            return Err(invalid("thetas must be positive and finite"));
        }
        let theta_bar = thetas.values().copied().fold(0.0, f64::max);
        let cdp = d as f64 * theta_bar;
        if cdp >= 1.0 {
            return Err(Error::CorrelationDecay(cdp));
        }
        let theta = |l: u32| thetas.get(&l).copied().ok_or_else(|| invalid(format!("no theta for label {l}")));
        let mut rows = vec![Vec::new(); p];
        for &(a, b) in edges {
            if a == b || a >= p || b >= p {
                return Err(invalid(format!("bad edge ({a}, {b})")));
            }
            let (la, lb) = (labels[a], labels[b]);
            let v = if la == lb { theta(la)? } else { rule.value(theta(la)?, theta(lb)?) };
            rows[a].push((b, v));
            rows[b].push((a, v));
        }
        for r in &mut rows {
            r.sort_by_key(|e| e.0);
            if r.windows(2).any(|w| w[0].0 == w[1].0) {
                return Err(invalid("duplicate edge"));
            }
        }
        let factor = Factor::new(&RawRows(&rows), strategy)?;
        Ok(Self {
            rows,
            thetas: thetas.clone(),
            d,
            eta,
            factor: Arc::new(factor),
        })
    }

    pub fn p(&self) -> usize {
        self.rows.len()
    }

    pub fn thetas(&self) -> &BTreeMap<u32, f64> {
        &self.thetas
    }

    pub fn theta_bar(&self) -> f64 {
        self.thetas.values().copied().fold(0.0, f64::max)
    }

    pub fn theta_under(&self) -> f64 {
        self.thetas.values().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn degree_budget(&self) -> usize {
        self.d
    }

    /// Vertex density used to build the model.
    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn factor(&self) -> &Factor {
        &self.factor
    }

    /// Entry `J[i][j]`.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        if i == j {
            return 1.0;
        }
        self.rows[i].binary_search_by_key(&j, |e| e.0).map(|k| self.rows[i][k].1).unwrap_or(0.0)
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        linalg::to_dense(self)
    }
}

/// Builds the precision model of a graph with its own per-region thetas.
pub fn build_precision(graph: &SpatialGraph, rule: CrossCoupling) -> Result<PrecisionModel> {
    PrecisionModel::from_edges(
        graph.p(),
        &graph.edges,
        &graph.labels,
        &graph.thetas,
        graph.params.d,
        graph.density(),
        rule,
        FactorStrategy::default(),
    )
}

/// Expected vertex count of the squares used for the boundary-crossing check.
pub const LOCALITY_MIN_VERTICES: f64 = 100.0;

/// Measured checks of the modelling assumptions.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AssumptionReport {
    /// Measured `P / sqrt(A)` per region.
    pub betas: BTreeMap<u32, f64>,
    /// Every measured beta exceeds 4.
    pub beta_above_four: bool,
    /// Boundary granularity `r`.
    pub side_unit: f64,
    /// Every boundary side is an integer multiple of `r`.
    pub sides_divisible: bool,
    pub degree_histogram: Vec<usize>,
    pub mean_degree: f64,
    pub fraction_at_budget: f64,
    /// Side of the tiling squares, a multiple of `side_unit`.
    pub square_side: f64,
    pub squares_checked: usize,
    /// Largest crossing-edge count over `d * sqrt(|A|)` among the tiled squares.
    /// Stays bounded as squares grow when wiring is local; reported, not judged.
    pub max_crossing_ratio: f64,
    /// Edges longer than `w_max`.
    pub long_edges: usize,
    /// No edge exceeds `w_max`.
    pub locality_ok: bool,
    /// `d * theta_bar`.
    pub correlation_decay: f64,
    pub correlation_decay_ok: bool,
}

/// Reports how well a graph, layout and model satisfy the modelling assumptions.
pub fn validate_assumptions(graph: &SpatialGraph, layout: &RegionLayout, precision: &PrecisionModel) -> AssumptionReport {
    let betas: BTreeMap<u32, f64> = layout.regions().iter().map(|r| (r.label, layout.beta(r))).collect();
    let beta_above_four = betas.values().all(|&b| b > 4.0);
    let r = layout.side_unit();
    let sides_divisible = layout.regions().iter().flat_map(|reg| layout.boundary_side_lengths(reg)).all(|len| {
        let q = len / r;
        (q - q.round()).abs() <= 1e-9 * q.max(1.0) && q.round() >= 1.0
    });

    let deg = graph.degrees();
    let d = graph.params.d;
    let mean_degree = deg.iter().sum::<usize>() as f64 / deg.len().max(1) as f64;
    let fraction_at_budget = deg.iter().filter(|&&k| k == d).count() as f64 / deg.len().max(1) as f64;

    // tile with the smallest multiple of r expected to hold LOCALITY_MIN_VERTICES,
    // since squares of a handful of vertices are dominated by their boundary
    let dom = graph.params.domain;
    let r = r.max(f64::MIN_POSITIVE);
    let density = graph.p() as f64 / dom.area();
    let side = r * ((LOCALITY_MIN_VERTICES / density).sqrt() / r).ceil().max(1.0);
    let square_of = |q: Point| (((q[0] - dom.x0) / side).floor() as i64, ((q[1] - dom.y0) / side).floor() as i64);
    let mut members: BTreeMap<(i64, i64), usize> = BTreeMap::new();
    for &q in &graph.coords {
        *members.entry(square_of(q)).or_default() += 1;
    }
    let mut crossing: BTreeMap<(i64, i64), usize> = BTreeMap::new();
    let mut long_edges = 0;
    for &(a, b) in &graph.edges {
        let (sa, sb) = (square_of(graph.coords[a]), square_of(graph.coords[b]));
        if sa != sb {
            *crossing.entry(sa).or_default() += 1;
            *crossing.entry(sb).or_default() += 1;
        }
        if dist(graph.coords[a], graph.coords[b]) > graph.params.w_max {
            long_edges += 1;
        }
    }
    let max_crossing_ratio = members
        .iter()
        .map(|(sq, &k)| crossing.get(sq).copied().unwrap_or(0) as f64 / (d as f64 * (k as f64).sqrt()))
        .fold(0.0, f64::max);
    let correlation_decay = precision.degree_budget() as f64 * precision.theta_bar();
    AssumptionReport {
        betas,
        beta_above_four,
        side_unit: r,
        sides_divisible,
        degree_histogram: degree_histogram(&deg),
        mean_degree,
        fraction_at_budget,
        square_side: side,
        squares_checked: members.len(),
        max_crossing_ratio,
        long_edges,
        locality_ok: long_edges == 0,
        correlation_decay,
        correlation_decay_ok: correlation_decay < 1.0,
    }
}

/// Edges of the `w x h` periodic grid (4-regular for `w, h >= 3`).
pub fn torus_edges(w: usize, h: usize) -> Vec<(usize, usize)> {
    let mut edges = Vec::with_capacity(2 * w * h);
    for y in 0..h {
        for x in 0..w {
            let v = x + w * y;
            edges.push((v, (x + 1) % w + w * y));
            edges.push((v, x + w * ((y + 1) % h)));
        }
    }
    edges
}

/// Uniform random `d`-regular simple graph on `p` vertices via the pairing model
/// with restarts.
pub fn random_regular_edges(p: usize, d: usize, seed: u64) -> Result<Vec<(usize, usize)>> {
    if p * d % 2 == 1 || d >= p {
        return Err(invalid(format!("no {d}-regular graph on {p} vertices")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    'attempt: for _ in 0..10_000 {
        let mut points: Vec<usize> = (0..p).flat_map(|v| std::iter::repeat_n(v, d)).collect();
        for k in (1..points.len()).rev() {
            let m = rng.random_range(0..=k);
            points.swap(k, m);
        }
        let mut seen = HashSet::new();
        let mut edges = Vec::with_capacity(p * d / 2);
        for pair in points.chunks(2) {
            let (a, b) = (pair[0].min(pair[1]), pair[0].max(pair[1]));
            if a == b || !seen.insert((a, b)) {
                continue 'attempt;
            }
            edges.push((a, b));
        }
        return Ok(edges);
    }
    Err(invalid("pairing model failed to produce a simple graph"))
}
