use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use super::{DetectionState, GredParams, Level};
use crate::error::Result;
use crate::gaussian::TraceSource;
use crate::geometry::{fill_gaps, Cell};

/// Candidate cell whose pattern agreed within the threshold.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Seed {
    pub center: Cell,
    /// Estimate pooled over the pattern cells.
    pub theta_hat: f64,
    /// Region the seed started, or `None` if its group was discarded.
    pub region: Option<u32>,
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, mut x: usize) -> usize {
        while self.0[x] != x {
            self.0[x] = self.0[self.0[x]];
            x = self.0[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// Scans every cell as a candidate seed, merges agreeing overlapping seeds, and
/// writes the resulting regions into `state`.
pub(crate) fn seed_scan<S: TraceSource + ?Sized>(level: &Level, params: &GredParams, source: &S, state: &mut DetectionState) -> Result<Vec<Seed>> {
    let est = params.estimator();
    let mut seeds = Vec::new();
    let mut footprints = Vec::new();
    for &c in &level.universe {
        let pattern: Vec<Cell> = std::iter::once(c).chain(params.seed_pattern.iter().map(|&(di, dj)| c.offset(di, dj))).collect();
        let Some(vals) = pattern.iter().map(|p| level.cell_theta.get(p).copied()).collect::<Option<Vec<f64>>>() else {
            continue;
        };
        let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if hi - lo > params.zeta {
            continue;
        }
        let Some(theta_hat) = level.pooled(&pattern, source, &est)? else { continue };
        let filled: BTreeSet<Cell> = fill_gaps(&pattern.iter().copied().collect())
            .into_iter()
            .filter(|x| level.universe.contains(x))
            .collect();
        seeds.push(Seed {
            center: c,
            theta_hat,
            region: None,
        });
        footprints.push(filled);
    }

    let mut uf = UnionFind((0..seeds.len()).collect());
    let mut by_cell: HashMap<Cell, Vec<usize>> = HashMap::new();
    for (k, fp) in footprints.iter().enumerate() {
        for &c in fp {
            by_cell.entry(c).or_default().push(k);
        }
    }
    for owners in by_cell.values() {
        for (x, &a) in owners.iter().enumerate() {
            for &b in &owners[x + 1..] {
                if (seeds[a].theta_hat - seeds[b].theta_hat).abs() <= params.zeta {
                    uf.union(a, b);
                }
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for k in 0..seeds.len() {
        let root = uf.find(k);
        groups.entry(root).or_default().push(k);
    }

    let mut next_id = 0u32;
    for members in groups.values() {
        let cells: BTreeSet<Cell> = members.iter().flat_map(|&k| footprints[k].iter().copied()).collect();
        // a group overlapping an accepted one disagrees with it; drop it
        if cells.iter().any(|c| state.assignments.contains_key(c)) {
            continue;
        }
        for &c in &cells {
            state.assignments.insert(c, next_id);
        }
        let theta = level
            .pooled(&cells, source, &est)?
            .unwrap_or_else(|| members.iter().map(|&k| seeds[k].theta_hat).sum::<f64>() / members.len() as f64);
        state.estimates.insert(next_id, theta);
        for &k in members {
            seeds[k].region = Some(next_id);
        }
        next_id += 1;
    }
    Ok(seeds)
}
