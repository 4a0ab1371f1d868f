use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use super::lattice::Cell;
use crate::error::{invalid, Error, Result};

/// Nonempty, edge-connected finite set of lattice cells.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Cell>", into = "Vec<Cell>")]
pub struct Polyomino {
    cells: BTreeSet<Cell>,
}

impl TryFrom<Vec<Cell>> for Polyomino {
    type Error = Error;
    fn try_from(v: Vec<Cell>) -> Result<Self> {
        Polyomino::new(v)
    }
}

impl From<Polyomino> for Vec<Cell> {
    fn from(p: Polyomino) -> Self {
        p.cells.into_iter().collect()
    }
}

impl Polyomino {
    pub fn new(cells: impl IntoIterator<Item = Cell>) -> Result<Self> {
        let cells: BTreeSet<Cell> = cells.into_iter().collect();
        if cells.is_empty() || !is_edge_connected(&cells) {
            return Err(Error::NotPolyomino);
        }
        Ok(Self { cells })
    }

    pub fn single(c: Cell) -> Self {
        Self { cells: BTreeSet::from([c]) }
    }

    /// `w x h` block whose lower-left cell is `corner`.
    pub fn rectangle(corner: Cell, w: i64, h: i64) -> Result<Self> {
        if w < 1 || h < 1 {
            return Err(invalid("rectangle sides must be positive"));
        }
        Ok(Self {
            cells: (0..w).flat_map(|a| (0..h).map(move |b| corner.offset(a, b))).collect(),
        })
    }

    pub fn cells(&self) -> &BTreeSet<Cell> {
        &self.cells
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, c: Cell) -> bool {
        self.cells.contains(&c)
    }

    /// Lowest and highest cell index along each axis.
    pub fn bounding_box(&self) -> (Cell, Cell) {
        let mut lo = *self.cells.first().unwrap();
        let mut hi = lo;
        for c in &self.cells {
            lo = Cell::new(lo.i.min(c.i), lo.j.min(c.j));
            hi = Cell::new(hi.i.max(c.i), hi.j.max(c.j));
        }
        (lo, hi)
    }

    /// Number of cell sides shared with an unoccupied cell.
    pub fn boundary_edges(&self) -> usize {
        self.cells
            .iter()
            .map(|c| c.edge_neighbors().iter().filter(|n| !self.cells.contains(n)).count())
            .sum()
    }

    /// `(perimeter, area)` for cells of side `width`.
    pub fn perimeter_area(&self, width: f64) -> (f64, f64) {
        (self.boundary_edges() as f64 * width, self.cells.len() as f64 * width * width)
    }

    /// Perimeter of the circumscribed rectangle, in cell sides.
    pub fn circumscribed_perimeter(&self) -> i64 {
        let (lo, hi) = self.bounding_box();
        2 * ((hi.i - lo.i + 1) + (hi.j - lo.j + 1))
    }

    /// True iff every row and every column of occupied cells is contiguous.
    pub fn is_convex(&self) -> bool {
        let (rows, cols) = spans(&self.cells);
        rows.values().chain(cols.values()).all(|&(lo, hi, n)| (hi - lo + 1) as usize == n)
    }

    /// Smallest row- and column-convex superset.
    pub fn convexify(&self) -> Polyomino {
        Polyomino { cells: fill_gaps(&self.cells) }
    }

    pub fn translate(&self, di: i64, dj: i64) -> Polyomino {
        Polyomino {
            cells: self.cells.iter().map(|c| c.offset(di, dj)).collect(),
        }
    }
}

/// Per row (`j`) and per column (`i`): `(min, max, count)` of the other index.
fn spans(cells: &BTreeSet<Cell>) -> (BTreeMap<i64, (i64, i64, usize)>, BTreeMap<i64, (i64, i64, usize)>) {
    let mut rows: BTreeMap<i64, (i64, i64, usize)> = BTreeMap::new();
    let mut cols: BTreeMap<i64, (i64, i64, usize)> = BTreeMap::new();
    for c in cells {
        let r = rows.entry(c.j).or_insert((c.i, c.i, 0));
        r.0 = r.0.min(c.i);
        r.1 = r.1.max(c.i);
        r.2 += 1;
        let k = cols.entry(c.i).or_insert((c.j, c.j, 0));
        k.0 = k.0.min(c.j);
        k.1 = k.1.max(c.j);
        k.2 += 1;
    }
    (rows, cols)
}

/// Repeatedly fills every gap inside a row or a column until nothing changes.
///
/// Works on arbitrary cell sets; for an edge-connected input the result is the
/// minimal convex polyomino containing it.
pub fn fill_gaps(cells: &BTreeSet<Cell>) -> BTreeSet<Cell> {
    let mut out = cells.clone();
    loop {
        let before = out.len();
        let (rows, cols) = spans(&out);
        for (&j, &(lo, hi, n)) in &rows {
            if (hi - lo + 1) as usize != n {
                out.extend((lo..=hi).map(|i| Cell::new(i, j)));
            }
        }
        for (&i, &(lo, hi, n)) in &cols {
            if (hi - lo + 1) as usize != n {
                out.extend((lo..=hi).map(|j| Cell::new(i, j)));
            }
        }
        if out.len() == before {
            return out;
        }
    }
}

/// Edge-connectivity of a cell set (the empty set counts as connected).
pub fn is_edge_connected(cells: &BTreeSet<Cell>) -> bool {
    let Some(&start) = cells.first() else { return true };
    let mut seen = BTreeSet::from([start]);
    let mut queue = VecDeque::from([start]);
    while let Some(c) = queue.pop_front() {
        for n in c.edge_neighbors() {
            if cells.contains(&n) && seen.insert(n) {
                queue.push_back(n);
            }
        }
    }
    seen.len() == cells.len()
}

/// Lower bound `2A/P` on the side of a square inscribed in a convex region.
pub fn min_inscribed_square_side(area: f64, perimeter: f64) -> Result<f64> {
    if !(area > 0.0 && perimeter > 0.0) {
        return Err(invalid(format!("area and perimeter must be positive, got {area}, {perimeter}")));
    }
    Ok(2.0 * area / perimeter)
}
