use std::collections::BTreeSet;
use std::fmt::Write;

use crate::geometry::{Cell, Point, RegionLayout};
use crate::gred::DetectionState;

const SIZE: f64 = 640.0;
const MARGIN: f64 = 10.0;
const PALETTE: [&str; 10] = [
    "#4e79a7", "#f28e2b", "#59a14f", "#e15759", "#b07aa1", "#76b7b2", "#edc948", "#ff9da7", "#9c755f", "#17becf",
];

/// File name for a snapshot: `iter{t}_{sub}.svg`.
pub fn snapshot_name(state: &DetectionState) -> String {
    format!("iter{}_{}.svg", state.iteration, state.subiteration)
}

/// SVG of the lattice, region assignments, gray cells, and optionally the
/// true region boundaries.
pub fn render_state(state: &DetectionState, truth: Option<&RegionLayout>) -> String {
    let d = &state.domain;
    let scale = (SIZE - 2.0 * MARGIN) / d.width().max(d.height());
    let w = d.width() * scale + 2.0 * MARGIN;
    let h = d.height() * scale + 2.0 * MARGIN;
    // flip y so the domain's lower-left is at the bottom
    let map = |p: Point| (MARGIN + (p[0] - d.x0) * scale, h - MARGIN - (p[1] - d.y0) * scale);
    let poly = |corners: &[Point]| {
        corners
            .iter()
            .map(|&p| map(p))
            .map(|(x, y)| format!("{x:.2},{y:.2}"))
            .collect::<Vec<_>>()
            .join(" ")
    };

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.0}" height="{h:.0}" viewBox="0 0 {w:.2} {h:.2}">"#
    );
    let _ = writeln!(svg, r#"<clipPath id="domain"><polygon points="{}"/></clipPath>"#, poly(&d.corners()));
    let _ = writeln!(svg, r##"<g clip-path="url(#domain)" stroke="#ffffff" stroke-width="0.4">"##);
    for c in state.universe() {
        let fill = match state.assignments.get(&c) {
            Some(&r) => PALETTE[r as usize % PALETTE.len()],
            None => "#d9d9d9",
        };
        let _ = writeln!(svg, r#"<polygon points="{}" fill="{fill}"/>"#, poly(&state.lattice.cell_corners(c)));
    }
    let _ = writeln!(svg, "</g>");
    let _ = writeln!(
        svg,
        r##"<polygon points="{}" fill="none" stroke="#000000" stroke-width="1"/>"##,
        poly(&d.corners())
    );
    if let Some(t) = truth {
        let _ = writeln!(
            svg,
            r##"<g stroke="#000000" stroke-width="2" stroke-dasharray="6 3" clip-path="url(#domain)">"##
        );
        for r in t.regions() {
            for (a, b) in boundary_segments(t, r.cells.cells()) {
                let ((x1, y1), (x2, y2)) = (map(a), map(b));
                let _ = writeln!(svg, r#"<line x1="{x1:.2}" y1="{y1:.2}" x2="{x2:.2}" y2="{y2:.2}"/>"#);
            }
        }
        let _ = writeln!(svg, "</g>");
    }
    let _ = writeln!(
        svg,
        r##"<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="12" fill="#000000">iteration {} ({}) tau {:.4}</text>"##,
        MARGIN + 4.0,
        MARGIN + 14.0,
        state.iteration,
        state.subiteration,
        state.tau()
    );
    svg.push_str("</svg>\n");
    svg
}

/// Cell edges of `cells` that are not shared with another cell of the set.
fn boundary_segments(layout: &RegionLayout, cells: &BTreeSet<Cell>) -> Vec<(Point, Point)> {
    let lat = layout.lattice();
    let mut out = Vec::new();
    for &c in cells {
        // corners run counter-clockwise from the lower-left
        let k = lat.cell_corners(c);
        let sides = [
            (c.offset(0, -1), k[0], k[1]),
            (c.offset(1, 0), k[1], k[2]),
            (c.offset(0, 1), k[2], k[3]),
            (c.offset(-1, 0), k[3], k[0]),
        ];
        for (n, a, b) in sides {
            if !cells.contains(&n) {
                out.push((a, b));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Lattice, Rect};

    #[test]
    fn empty_state_draws_only_the_lattice() {
        let s = DetectionState::empty(Lattice::axis_aligned([0.0, 0.0], 0.5).unwrap(), Rect::new(0.0, 0.0, 2.0, 2.0).unwrap());
        let svg = render_state(&s, None);
        assert!(svg.starts_with("<svg"));
        assert_eq!(svg.matches("#d9d9d9").count(), 16);
        assert!(!svg.contains("<line"));
        assert_eq!(snapshot_name(&s), "iter0_0.svg");
    }

    #[test]
    fn truth_boundaries_are_drawn() {
        let domain = Rect::new(0.0, 0.0, 2.0, 2.0).unwrap();
        let truth = RegionLayout::grid(domain, 2, 2, &[0.04, 0.056, 0.069, 0.08], 0.02, 0.5).unwrap();
        let mut s = DetectionState::empty(Lattice::axis_aligned([0.0, 0.0], 0.5).unwrap(), domain);
        s.assignments.insert(Cell::new(0, 0), 0);
        let svg = render_state(&s, Some(&truth));
        assert_eq!(svg.matches("<line").count(), 16);
        assert_eq!(svg.matches(PALETTE[0]).count(), 1);
    }
}
