use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use super::clip::{clip_convex, polygon_area};
use super::lattice::{Cell, Lattice, Point, Rect};
use super::polyomino::Polyomino;
use crate::error::{invalid, Error, Result};

/// One region of a layout: its cells and coupling parameter.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub label: u32,
    pub theta: f64,
    pub cells: Polyomino,
}

#[derive(Serialize, Deserialize)]
struct LayoutRecord {
    lattice: Lattice,
    rho: f64,
    xi: f64,
    domain: Option<Rect>,
    regions: Vec<Region>,
}

/// Disjoint polyomino regions on a common lattice.
///
/// `rho` and `xi` set the boundary granularity `r = rho * A^xi`, where `A` is
/// the domain area (or the total region area when no domain is attached).
/// Cell areas are clipped to the domain when one is attached.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "LayoutRecord", into = "LayoutRecord")]
pub struct RegionLayout {
    lattice: Lattice,
    rho: f64,
    xi: f64,
    domain: Option<Rect>,
    regions: Vec<Region>,
    index: HashMap<Cell, usize>,
}

impl PartialEq for RegionLayout {
    fn eq(&self, o: &Self) -> bool {
        self.lattice == o.lattice && self.rho == o.rho && self.xi == o.xi && self.domain == o.domain && self.regions == o.regions
    }
}

impl TryFrom<LayoutRecord> for RegionLayout {
    type Error = Error;
    fn try_from(r: LayoutRecord) -> Result<Self> {
        RegionLayout::new(r.lattice, r.regions, r.rho, r.xi, r.domain)
    }
}

impl From<RegionLayout> for LayoutRecord {
    fn from(l: RegionLayout) -> Self {
        LayoutRecord {
            lattice: l.lattice,
            rho: l.rho,
            xi: l.xi,
            domain: l.domain,
            regions: l.regions,
        }
    }
}

impl RegionLayout {
    pub fn new(lattice: Lattice, regions: Vec<Region>, rho: f64, xi: f64, domain: Option<Rect>) -> Result<Self> {
        if !(rho > 0.0 && rho.is_finite()) || !(xi >= 0.0 && xi.is_finite()) {
            return Err(invalid(format!("rho must be positive and xi nonnegative, got {rho}, {xi}")));
        }
        let mut index = HashMap::new();
        let mut labels = std::collections::BTreeSet::new();
        for (k, r) in regions.iter().enumerate() {
            if !labels.insert(r.label) {
                return Err(invalid(format!("duplicate region label {}", r.label)));
            }
            if !r.theta.is_finite() {
                return Err(invalid("region theta must be finite"));
            }
            for &c in r.cells.cells() {
                if index.insert(c, k).is_some() {
                    return Err(Error::OverlappingRegions(c.i, c.j));
                }
            }
        }
        Ok(Self {
            lattice,
            rho,
            xi,
            domain,
            regions,
            index,
        })
    }

    /// Splits `domain` into a `rows x cols` grid of square regions, one lattice cell each.
    ///
    /// Labels run row by row from the lower-left; `thetas` is consumed in that order.
    pub fn grid(domain: Rect, rows: usize, cols: usize, thetas: &[f64], rho: f64, xi: f64) -> Result<Self> {
        if rows == 0 || cols == 0 || thetas.len() != rows * cols {
            return Err(invalid(format!("grid {rows}x{cols} needs {} thetas, got {}", rows * cols, thetas.len())));
        }
        let side = domain.width() / cols as f64;
        if (domain.height() / rows as f64 - side).abs() > 1e-12 * side {
            return Err(invalid("grid cells must be square"));
        }
        let lattice = Lattice::axis_aligned([domain.x0, domain.y0], side)?;
        let regions = (0..rows)
            .flat_map(|j| (0..cols).map(move |i| (i, j)))
            .enumerate()
            .map(|(k, (i, j))| Region {
                label: k as u32,
                theta: thetas[k],
                cells: Polyomino::single(Cell::new(i as i64, j as i64)),
            })
            .collect();
        Self::new(lattice, regions, rho, xi, Some(domain))
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn regions(&self) -> &[Region] {
        &self.regions
    }

    pub fn region(&self, label: u32) -> Option<&Region> {
        self.regions.iter().find(|r| r.label == label)
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn xi(&self) -> f64 {
        self.xi
    }

    pub fn domain(&self) -> Option<&Rect> {
        self.domain.as_ref()
    }

    /// Label of the region whose cells contain `p`.
    pub fn region_at(&self, p: Point) -> Option<u32> {
        self.index.get(&self.lattice.cell_of(p)).map(|&k| self.regions[k].label)
    }

    /// Label of the region owning cell `c`.
    pub fn label_of_cell(&self, c: Cell) -> Option<u32> {
        self.index.get(&c).map(|&k| self.regions[k].label)
    }

    fn cell_area(&self, c: Cell) -> f64 {
        match &self.domain {
            Some(d) => self.lattice.cell_area_within(c, d),
            None => self.lattice.cell_area(),
        }
    }

    /// Area of a region, clipped to the domain.
    pub fn area(&self, region: &Region) -> f64 {
        region.cells.cells().iter().map(|&c| self.cell_area(c)).sum()
    }

    /// Total area used for the boundary granularity.
    pub fn total_area(&self) -> f64 {
        match &self.domain {
            Some(d) => d.area(),
            None => self.regions.iter().map(|r| self.area(r)).sum(),
        }
    }

    /// Boundary granularity `r = rho * A^xi`.
    pub fn side_unit(&self) -> f64 {
        self.rho * self.total_area().powf(self.xi)
    }

    /// Measured shape constant `P / sqrt(A)` of a region.
    pub fn beta(&self, region: &Region) -> f64 {
        let (per, area) = region.cells.perimeter_area(self.lattice.width());
        per / area.sqrt()
    }

    /// Lengths of the maximal straight boundary sides of a region.
    pub fn boundary_side_lengths(&self, region: &Region) -> Vec<f64> {
        let cells = region.cells.cells();
        // key: (orientation, outward sign, line coordinate) -> positions along the line
        let mut lines: BTreeMap<(u8, i8, i64), Vec<i64>> = BTreeMap::new();
        for &c in cells {
            if !cells.contains(&c.offset(0, 1)) {
                lines.entry((0, 1, c.j + 1)).or_default().push(c.i);
            }
            if !cells.contains(&c.offset(0, -1)) {
                lines.entry((0, -1, c.j)).or_default().push(c.i);
            }
            if !cells.contains(&c.offset(1, 0)) {
                lines.entry((1, 1, c.i + 1)).or_default().push(c.j);
            }
            if !cells.contains(&c.offset(-1, 0)) {
                lines.entry((1, -1, c.i)).or_default().push(c.j);
            }
        }
        let w = self.lattice.width();
        let mut out = Vec::new();
        for (_, mut pos) in lines {
            pos.sort_unstable();
            let mut run = 1;
            for k in 1..pos.len() {
                if pos[k] == pos[k - 1] + 1 {
                    run += 1;
                } else {
                    out.push(run as f64 * w);
                    run = 1;
                }
            }
            out.push(run as f64 * w);
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// Symmetric-difference areas between a reference layout and a detected one.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SymDiffReport {
    /// Per reference label: area of the symmetric difference with its matched region
    /// (the full reference area when unmatched).
    pub per_region: BTreeMap<u32, f64>,
    /// Detected regions left without a partner, with their areas.
    pub unmatched_detected: BTreeMap<u32, f64>,
    /// Reference label -> detected label.
    pub matching: BTreeMap<u32, u32>,
    /// Reference region areas.
    pub reference_area: BTreeMap<u32, f64>,
    /// Detected region areas.
    pub detected_area: BTreeMap<u32, f64>,
}

impl SymDiffReport {
    /// Sum over matched pairs and unmatched regions on both sides.
    pub fn total(&self) -> f64 {
        self.per_region.values().chain(self.unmatched_detected.values()).fold(0.0, |a, b| a + b)
    }
}

/// Area of `region_a` (in layout `a`) intersected with `region_b` (in layout `b`).
fn overlap_area(a: &RegionLayout, ra: &Region, b: &RegionLayout, rb: &Region, domain: Option<&Rect>) -> f64 {
    if a.lattice == b.lattice {
        return ra.cells.cells().intersection(rb.cells.cells()).map(|&c| a.cell_area(c)).sum();
    }
    // iterate over the side with fewer cells
    let (outer, outer_lat, inner, inner_lat) = if ra.cells.len() <= rb.cells.len() {
        (ra, &a.lattice, rb, &b.lattice)
    } else {
        (rb, &b.lattice, ra, &a.lattice)
    };
    let both_axis_aligned = outer_lat.angle() == 0.0 && inner_lat.angle() == 0.0;
    let mut total = 0.0;
    for &co in outer.cells.cells() {
        let corners = outer_lat.cell_corners(co);
        let locals: Vec<Point> = corners.iter().map(|&p| inner_lat.to_local(p)).collect();
        let i0 = locals.iter().map(|l| l[0]).fold(f64::INFINITY, f64::min).floor() as i64;
        let i1 = locals.iter().map(|l| l[0]).fold(f64::NEG_INFINITY, f64::max).ceil() as i64;
        let j0 = locals.iter().map(|l| l[1]).fold(f64::INFINITY, f64::min).floor() as i64;
        let j1 = locals.iter().map(|l| l[1]).fold(f64::NEG_INFINITY, f64::max).ceil() as i64;
        for i in i0..i1 {
            for j in j0..j1 {
                let ci = Cell::new(i, j);
                if !inner.cells.contains(ci) {
                    continue;
                }
                total += if both_axis_aligned {
                    let (ro, ri) = (rect_of(outer_lat, co), rect_of(inner_lat, ci));
                    let mut x0 = ro.0.max(ri.0);
                    let mut y0 = ro.1.max(ri.1);
                    let mut x1 = ro.2.min(ri.2);
                    let mut y1 = ro.3.min(ri.3);
                    if let Some(d) = domain {
                        x0 = x0.max(d.x0);
                        y0 = y0.max(d.y0);
                        x1 = x1.min(d.x1);
                        y1 = y1.min(d.y1);
                    }
                    if x1 > x0 && y1 > y0 {
                        (x1 - x0) * (y1 - y0)
                    } else {
                        0.0
                    }
                } else {
                    let mut poly = clip_convex(&corners, &inner_lat.cell_corners(ci));
                    if let Some(d) = domain {
                        poly = clip_convex(&poly, &d.corners());
                    }
                    polygon_area(&poly)
                };
            }
        }
    }
    total
}

fn rect_of(l: &Lattice, c: Cell) -> (f64, f64, f64, f64) {
    let o = l.origin();
    let w = l.width();
    let x0 = o[0] + c.i as f64 * w;
    let y0 = o[1] + c.j as f64 * w;
    (x0, y0, x0 + w, y0 + w)
}

/// Symmetric-difference area per region after greedy maximal-overlap matching.
///
/// The layouts may sit on different lattices; overlaps are then computed
/// exactly by polygon clipping. Areas are clipped to the domain of `a`
/// (or of `b` when `a` has none).
pub fn symmetric_difference_area(a: &RegionLayout, b: &RegionLayout) -> SymDiffReport {
    let domain = a.domain.or(b.domain);
    let area_in = |l: &RegionLayout, r: &Region| -> f64 {
        match &domain {
            Some(d) => r.cells.cells().iter().map(|&c| l.lattice.cell_area_within(c, d)).sum(),
            None => l.area(r),
        }
    };
    let reference_area: BTreeMap<u32, f64> = a.regions.iter().map(|r| (r.label, area_in(a, r))).collect();
    let detected_area: BTreeMap<u32, f64> = b.regions.iter().map(|r| (r.label, area_in(b, r))).collect();

    let mut pairs = Vec::new();
    for ra in &a.regions {
        for rb in &b.regions {
            let ov = overlap_area(a, ra, b, rb, domain.as_ref());
            if ov > 0.0 {
                pairs.push((ov, ra.label, rb.label));
            }
        }
    }
    pairs.sort_by(|x, y| y.0.total_cmp(&x.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));
    let mut matching = BTreeMap::new();
    let mut taken = std::collections::BTreeSet::new();
    let mut per_region = BTreeMap::new();
    for (ov, la, lb) in pairs {
        if matching.contains_key(&la) || taken.contains(&lb) {
            continue;
        }
        matching.insert(la, lb);
        taken.insert(lb);
        let d = (reference_area[&la] + detected_area[&lb] - 2.0 * ov).max(0.0);
        per_region.insert(la, d);
    }
    for (&la, &area) in &reference_area {
        per_region.entry(la).or_insert(area);
    }
    let unmatched_detected = detected_area.iter().filter(|(lb, _)| !taken.contains(*lb)).map(|(&lb, &ar)| (lb, ar)).collect();
    SymDiffReport {
        per_region,
        unmatched_detected,
        matching,
        reference_area,
        detected_area,
    }
}
