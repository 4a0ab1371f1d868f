use std::collections::{BTreeMap, BTreeSet, VecDeque};

use super::{DetectionState, GredParams, Level};
use crate::error::Result;
use crate::gaussian::TraceSource;

/// One growth pass. Decisions are taken against the state at the start of the
/// pass and committed in cell order. Returns whether anything changed.
pub(crate) fn grow_pass<S: TraceSource + ?Sized>(level: &Level, state: &mut DetectionState, params: &GredParams, source: &S) -> Result<bool> {
    let mut attach = Vec::new();
    for &c in &level.universe {
        if state.assignments.contains_key(&c) {
            continue;
        }
        let nbrs = c.edge_neighbors();
        let adjacent: BTreeSet<u32> = nbrs.iter().filter_map(|n| state.assignments.get(n).copied()).collect();
        let Some(&first) = adjacent.first() else { continue };
        if adjacent.len() == 1 && nbrs.iter().all(|n| state.assignments.contains_key(n)) {
            attach.push((c, first));
            continue;
        }
        let Some(&theta) = level.cell_theta.get(&c) else { continue };
        let best = adjacent
            .iter()
            .filter_map(|r| state.estimates.get(r).map(|t| ((theta - t).abs(), *r)))
            .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        if let Some((gap, r)) = best {
            if gap <= params.zeta {
                attach.push((c, r));
            }
        }
    }
    let mut changed = !attach.is_empty();
    state.assignments.extend(attach);
    changed |= fill_holes(level, state);
    let merged = merge_adjacent(state, params.zeta);
    changed |= !merged.is_empty();
    let est = params.estimator();
    if params.update_estimates {
        level.refresh_estimates(state, None, source, &est)?;
    } else if !merged.is_empty() {
        level.refresh_estimates(state, Some(&merged), source, &est)?;
    }
    Ok(changed)
}

/// Assigns enclosed unassigned components bordered by a single region.
fn fill_holes(level: &Level, state: &mut DetectionState) -> bool {
    let mut seen = BTreeSet::new();
    let mut fills = Vec::new();
    for &start in &level.universe {
        if state.assignments.contains_key(&start) || !seen.insert(start) {
            continue;
        }
        let mut comp = vec![start];
        let mut queue = VecDeque::from([start]);
        let mut border = BTreeSet::new();
        let mut open = false;
        while let Some(c) = queue.pop_front() {
            for n in c.edge_neighbors() {
                if !level.universe.contains(&n) {
                    open = true;
                } else if let Some(&r) = state.assignments.get(&n) {
                    border.insert(r);
                } else if seen.insert(n) {
                    comp.push(n);
                    queue.push_back(n);
                }
            }
        }
        if !open && border.len() == 1 {
            let r = *border.first().unwrap();
            fills.extend(comp.into_iter().map(|c| (c, r)));
        }
    }
    let changed = !fills.is_empty();
    state.assignments.extend(fills);
    changed
}

/// Merges edge-adjacent regions whose estimates agree within `zeta`; the lowest
/// id of each merged group survives. Returns the surviving ids that absorbed others.
fn merge_adjacent(state: &mut DetectionState, zeta: f64) -> BTreeSet<u32> {
    let mut parent: BTreeMap<u32, u32> = state.estimates.keys().map(|&k| (k, k)).collect();
    fn find(p: &mut BTreeMap<u32, u32>, mut x: u32) -> u32 {
        while p[&x] != x {
            x = p[&x];
        }
        x
    }
    let mut any = false;
    for (&c, &r) in &state.assignments {
        for n in [c.offset(1, 0), c.offset(0, 1)] {
            let Some(&s) = state.assignments.get(&n) else { continue };
            if s == r {
                continue;
            }
            let (Some(tr), Some(ts)) = (state.estimates.get(&r), state.estimates.get(&s)) else {
                continue;
            };
            if (tr - ts).abs() <= zeta {
                let (a, b) = (find(&mut parent, r), find(&mut parent, s));
                if a != b {
                    parent.insert(a.max(b), a.min(b));
                    any = true;
                }
            }
        }
    }
    if !any {
        return BTreeSet::new();
    }
    let mut survivors = BTreeSet::new();
    let ids: Vec<u32> = parent.keys().copied().collect();
    let roots: BTreeMap<u32, u32> = ids.iter().map(|&k| (k, find(&mut parent, k))).collect();
    for (k, root) in &roots {
        if k != root {
            survivors.insert(*root);
            state.estimates.remove(k);
        }
    }
    for r in state.assignments.values_mut() {
        *r = roots[r];
    }
    survivors
}
