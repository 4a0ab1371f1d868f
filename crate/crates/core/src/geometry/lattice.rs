use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// A point in the plane.
pub type Point = [f64; 2];

/// Integer index of a lattice cell.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "[i64; 2]", into = "[i64; 2]")]
pub struct Cell {
    pub i: i64,
    pub j: i64,
}

impl Cell {
    pub const fn new(i: i64, j: i64) -> Self {
        Self { i, j }
    }

    pub fn offset(self, di: i64, dj: i64) -> Self {
        Self::new(self.i + di, self.j + dj)
    }

    /// The four edge-adjacent cells, in a fixed order.
    pub fn edge_neighbors(self) -> [Cell; 4] {
        [self.offset(1, 0), self.offset(-1, 0), self.offset(0, 1), self.offset(0, -1)]
    }

    /// Cells of the lattice refined by `factor` that tile this cell.
    pub fn children(self, factor: u32) -> impl Iterator<Item = Cell> {
        let f = factor as i64;
        let (i0, j0) = (self.i * f, self.j * f);
        (0..f).flat_map(move |a| (0..f).map(move |b| Cell::new(i0 + a, j0 + b)))
    }
}

impl From<[i64; 2]> for Cell {
    fn from(v: [i64; 2]) -> Self {
        Self::new(v[0], v[1])
    }
}

impl From<Cell> for [i64; 2] {
    fn from(c: Cell) -> Self {
        [c.i, c.j]
    }
}

/// Axis-aligned rectangle `[x0, x1] x [y0, y1]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl Rect {
    pub fn new(x0: f64, y0: f64, x1: f64, y1: f64) -> Result<Self> {
        if !(x0.is_finite() && y0.is_finite() && x1.is_finite() && y1.is_finite()) || x1 <= x0 || y1 <= y0 {
            return Err(invalid(format!("degenerate rectangle [{x0}, {x1}] x [{y0}, {y1}]")));
        }
        Ok(Self { x0, y0, x1, y1 })
    }

    pub fn width(&self) -> f64 {
        self.x1 - self.x0
    }

    pub fn height(&self) -> f64 {
        self.y1 - self.y0
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn contains(&self, p: Point) -> bool {
        p[0] >= self.x0 && p[0] <= self.x1 && p[1] >= self.y0 && p[1] <= self.y1
    }

    /// Corners in counter-clockwise order starting at the lower-left.
    pub fn corners(&self) -> [Point; 4] {
        [[self.x0, self.y0], [self.x1, self.y0], [self.x1, self.y1], [self.x0, self.y1]]
    }
}

#[derive(Serialize, Deserialize)]
struct LatticeRecord {
    origin: Point,
    angle: f64,
    width: f64,
}

/// Square lattice with a reference node, axis direction and cell width.
///
/// The axis is stored as an angle so that serialization round-trips bit-exactly;
/// its cosine and sine are cached.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(try_from = "LatticeRecord", into = "LatticeRecord")]
pub struct Lattice {
    origin: Point,
    angle: f64,
    width: f64,
    cos: f64,
    sin: f64,
}

impl PartialEq for Lattice {
    fn eq(&self, other: &Self) -> bool {
        self.origin == other.origin && self.angle == other.angle && self.width == other.width
    }
}

impl TryFrom<LatticeRecord> for Lattice {
    type Error = crate::Error;
    fn try_from(r: LatticeRecord) -> Result<Self> {
        Lattice::new(r.origin, r.angle, r.width)
    }
}

impl From<Lattice> for LatticeRecord {
    fn from(l: Lattice) -> Self {
        LatticeRecord {
            origin: l.origin,
            angle: l.angle,
            width: l.width,
        }
    }
}

impl Lattice {
    pub fn new(origin: Point, angle: f64, width: f64) -> Result<Self> {
        if !(width > 0.0 && width.is_finite()) {
            return Err(invalid(format!("lattice width must be positive, got {width}")));
        }
        if !(angle.is_finite() && origin[0].is_finite() && origin[1].is_finite()) {
            return Err(invalid("lattice origin and angle must be finite"));
        }
        let (sin, cos) = angle.sin_cos();
        Ok(Self {
            origin,
            angle,
            width,
            cos,
            sin,
        })
    }

    /// Axis-aligned lattice.
    pub fn axis_aligned(origin: Point, width: f64) -> Result<Self> {
        Self::new(origin, 0.0, width)
    }

    /// Lattice whose first axis points along `axis`, which must have unit length.
    pub fn from_axis(origin: Point, axis: Point, width: f64) -> Result<Self> {
        let norm = axis[0].hypot(axis[1]);
        if (norm - 1.0).abs() > 1e-12 {
            return Err(invalid(format!("lattice axis must be a unit vector, norm is {norm}")));
        }
        Self::new(origin, axis[1].atan2(axis[0]), width)
    }

    pub fn origin(&self) -> Point {
        self.origin
    }

    pub fn angle(&self) -> f64 {
        self.angle
    }

    pub fn axis(&self) -> Point {
        [self.cos, self.sin]
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn cell_area(&self) -> f64 {
        self.width * self.width
    }

    /// Same frame, width divided by `factor`.
    pub fn refined(&self, factor: u32) -> Self {
        Self {
            width: self.width / factor as f64,
            ..*self
        }
    }

    /// Same frame, different width.
    pub fn with_width(&self, width: f64) -> Result<Self> {
        Self::new(self.origin, self.angle, width)
    }

    /// Coordinates of `p` in the lattice frame, in units of cell width.
    pub fn to_local(&self, p: Point) -> Point {
        let dx = p[0] - self.origin[0];
        let dy = p[1] - self.origin[1];
        [(dx * self.cos + dy * self.sin) / self.width, (-dx * self.sin + dy * self.cos) / self.width]
    }

    /// Inverse of [`Lattice::to_local`].
    pub fn to_world(&self, local: Point) -> Point {
        let u = local[0] * self.width;
        let v = local[1] * self.width;
        [self.origin[0] + u * self.cos - v * self.sin, self.origin[1] + u * self.sin + v * self.cos]
    }

    pub fn cell_of(&self, p: Point) -> Cell {
        let l = self.to_local(p);
        Cell::new(l[0].floor() as i64, l[1].floor() as i64)
    }

    pub fn cell_center(&self, c: Cell) -> Point {
        self.to_world([c.i as f64 + 0.5, c.j as f64 + 0.5])
    }

    /// Cell corners in counter-clockwise order.
    pub fn cell_corners(&self, c: Cell) -> [Point; 4] {
        let (i, j) = (c.i as f64, c.j as f64);
        [
            self.to_world([i, j]),
            self.to_world([i + 1.0, j]),
            self.to_world([i + 1.0, j + 1.0]),
            self.to_world([i, j + 1.0]),
        ]
    }

    /// Area of the part of cell `c` inside `domain`.
    pub fn cell_area_within(&self, c: Cell, domain: &Rect) -> f64 {
        if self.angle == 0.0 {
            let x0 = self.origin[0] + c.i as f64 * self.width;
            let y0 = self.origin[1] + c.j as f64 * self.width;
            let w = (x0 + self.width).min(domain.x1) - x0.max(domain.x0);
            let h = (y0 + self.width).min(domain.y1) - y0.max(domain.y0);
            return if w > 0.0 && h > 0.0 { w * h } else { 0.0 };
        }
        super::polygon_area(&super::clip_convex(&self.cell_corners(c), &domain.corners()))
    }

    /// Every cell with positive-area overlap with `domain`, sorted.
    pub fn cells_covering(&self, domain: &Rect) -> Vec<Cell> {
        let locals: Vec<Point> = domain.corners().iter().map(|&p| self.to_local(p)).collect();
        let lo_i = locals.iter().map(|l| l[0]).fold(f64::INFINITY, f64::min).floor() as i64;
        let hi_i = locals.iter().map(|l| l[0]).fold(f64::NEG_INFINITY, f64::max).ceil() as i64;
        let lo_j = locals.iter().map(|l| l[1]).fold(f64::INFINITY, f64::min).floor() as i64;
        let hi_j = locals.iter().map(|l| l[1]).fold(f64::NEG_INFINITY, f64::max).ceil() as i64;
        let tiny = 1e-12 * self.cell_area();
        let mut out = Vec::new();
        for i in lo_i..hi_i {
            for j in lo_j..hi_j {
                let c = Cell::new(i, j);
                if self.cell_area_within(c, domain) > tiny {
                    out.push(c);
                }
            }
        }
        out
    }
}
