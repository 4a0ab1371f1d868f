use std::collections::{BTreeMap, BTreeSet};

use super::group;
use crate::geometry::{fill_gaps, is_edge_connected, Cell};

const ROUNDS: usize = 8;

fn is_convex_set(cells: &BTreeSet<Cell>) -> bool {
    !cells.is_empty() && fill_gaps(cells).len() == cells.len() && is_edge_connected(cells)
}

fn centroid(cells: &BTreeSet<Cell>) -> [f64; 2] {
    let n = cells.len() as f64;
    let (si, sj) = cells.iter().fold((0.0, 0.0), |(a, b), c| (a + c.i as f64, b + c.j as f64));
    [si / n, sj / n]
}

/// Fills row and column gaps of every region.
///
/// Cells claimed by several regions go to the one with the nearest centroid,
/// then the lower id. If regions are still not convex after a few rounds, each
/// offending region keeps its largest component's hull when that is free, or
/// else the largest rectangle inside it; the rest becomes unassigned.
/// Returns whether any assignment changed.
pub fn convexify_assignments(assignments: &mut BTreeMap<Cell, u32>, universe: &BTreeSet<Cell>) -> bool {
    let original = assignments.clone();
    for _ in 0..ROUNDS {
        let regions = group(assignments);
        if regions.values().all(is_convex_set) {
            return *assignments != original;
        }
        let centroids: BTreeMap<u32, [f64; 2]> = regions.iter().map(|(&r, cells)| (r, centroid(cells))).collect();
        let mut claims: BTreeMap<Cell, Vec<u32>> = BTreeMap::new();
        for (&r, cells) in &regions {
            for c in fill_gaps(cells) {
                if universe.contains(&c) {
                    claims.entry(c).or_default().push(r);
                }
            }
        }
        *assignments = claims
            .into_iter()
            .map(|(c, owners)| {
                let dist = |r: &u32| {
                    let m = centroids[r];
                    (c.i as f64 - m[0]).powi(2) + (c.j as f64 - m[1]).powi(2)
                };
                let best = owners.iter().copied().min_by(|a, b| dist(a).total_cmp(&dist(b)).then(a.cmp(b))).unwrap();
                (c, best)
            })
            .collect();
    }
    let mut regions = group(assignments);
    let ids: Vec<u32> = regions.keys().copied().collect();
    for r in ids {
        let cells = &regions[&r];
        if is_convex_set(cells) {
            continue;
        }
        let comp = largest_component(cells);
        let hull = fill_gaps(&comp);
        let taken = regions.iter().any(|(&o, oc)| o != r && hull.iter().any(|c| oc.contains(c)));
        let keep = if taken || !hull.iter().all(|c| universe.contains(c)) {
            largest_rectangle(&comp)
        } else {
            hull
        };
        regions.insert(r, keep);
    }
    *assignments = regions.into_iter().flat_map(|(r, cells)| cells.into_iter().map(move |c| (c, r))).collect();
    *assignments != original
}

fn largest_component(cells: &BTreeSet<Cell>) -> BTreeSet<Cell> {
    let mut seen = BTreeSet::new();
    let mut best = BTreeSet::new();
    for &s in cells {
        if seen.contains(&s) {
            continue;
        }
        let mut comp = BTreeSet::from([s]);
        let mut stack = vec![s];
        seen.insert(s);
        while let Some(c) = stack.pop() {
            for n in c.edge_neighbors() {
                if cells.contains(&n) && seen.insert(n) {
                    comp.insert(n);
                    stack.push(n);
                }
            }
        }
        if comp.len() > best.len() {
            best = comp;
        }
    }
    best
}

/// Largest axis-aligned rectangle of cells contained in `cells`.
fn largest_rectangle(cells: &BTreeSet<Cell>) -> BTreeSet<Cell> {
    let (Some(first), Some(_)) = (cells.first(), cells.last()) else {
        return BTreeSet::new();
    };
    let (mut i0, mut i1, mut j0, mut j1) = (first.i, first.i, first.j, first.j);
    for c in cells {
        i0 = i0.min(c.i);
        i1 = i1.max(c.i);
        j0 = j0.min(c.j);
        j1 = j1.max(c.j);
    }
    let width = (i1 - i0 + 1) as usize;
    let mut heights = vec![0usize; width];
    // (area, left, right, top row, height)
    let mut best = (0usize, 0usize, 0usize, j0, 0usize);
    for j in j0..=j1 {
        for (x, h) in heights.iter_mut().enumerate() {
            *h = if cells.contains(&Cell::new(i0 + x as i64, j)) { *h + 1 } else { 0 };
        }
        for left in 0..width {
            let mut h = usize::MAX;
            for right in left..width {
                h = h.min(heights[right]);
                if h == 0 {
                    break;
                }
                let area = h * (right - left + 1);
                if area > best.0 {
                    best = (area, left, right, j, h);
                }
            }
        }
    }
    let (_, left, right, top, h) = best;
    let mut out = BTreeSet::new();
    for x in left..=right {
        for dy in 0..h {
            out.insert(Cell::new(i0 + x as i64, top - dy as i64));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cells(v: &[(i64, i64)]) -> BTreeSet<Cell> {
        v.iter().map(|&(i, j)| Cell::new(i, j)).collect()
    }

    fn universe(n: i64) -> BTreeSet<Cell> {
        (0..n).flat_map(|i| (0..n).map(move |j| Cell::new(i, j))).collect()
    }

    #[test]
    fn fills_a_notch() {
        let mut a: BTreeMap<Cell, u32> = cells(&[(0, 0), (1, 0), (2, 0), (0, 1), (2, 1)]).into_iter().map(|c| (c, 0)).collect();
        assert!(convexify_assignments(&mut a, &universe(5)));
        assert_eq!(a.len(), 6);
        assert!(!convexify_assignments(&mut a, &universe(5)));
    }

    #[test]
    fn overlapping_hulls_are_split() {
        // two interlocking L shapes whose hulls overlap
        let r0 = cells(&[(0, 0), (1, 0), (2, 0), (0, 1)]);
        let r1 = cells(&[(2, 2), (1, 2), (0, 2), (2, 1)]);
        let mut a: BTreeMap<Cell, u32> = r0.iter().map(|&c| (c, 0)).chain(r1.iter().map(|&c| (c, 1))).collect();
        let before: BTreeSet<Cell> = a.keys().copied().collect();
        convexify_assignments(&mut a, &universe(5));
        let groups = group(&a);
        assert_eq!(groups.len(), 2);
        for g in groups.values() {
            assert!(is_convex_set(g));
        }
        let after: BTreeSet<Cell> = a.keys().copied().collect();
        assert!(before.is_subset(&after));
    }

    #[test]
    fn rectangle_search() {
        let c = cells(&[(0, 0), (1, 0), (2, 0), (0, 1), (1, 1), (2, 1), (0, 2), (5, 5)]);
        assert_eq!(largest_rectangle(&c).len(), 6);
    }
}
