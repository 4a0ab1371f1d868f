use super::lattice::Point;

/// Shoelace area of a simple polygon (absolute value).
pub fn polygon_area(poly: &[Point]) -> f64 {
    if poly.len() < 3 {
        return 0.0;
    }
    let mut twice = 0.0;
    for k in 0..poly.len() {
        let a = poly[k];
        let b = poly[(k + 1) % poly.len()];
        twice += a[0] * b[1] - b[0] * a[1];
    }
    0.5 * twice.abs()
}

/// Sutherland-Hodgman clip of `subject` against a convex counter-clockwise `clip` polygon.
pub fn clip_convex(subject: &[Point], clip: &[Point]) -> Vec<Point> {
    let mut out: Vec<Point> = subject.to_vec();
    for k in 0..clip.len() {
        if out.is_empty() {
            break;
        }
        let a = clip[k];
        let b = clip[(k + 1) % clip.len()];
        let inside = |p: &Point| (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0]) >= 0.0;
        let input = std::mem::take(&mut out);
        for m in 0..input.len() {
            let cur = input[m];
            let prev = input[(m + input.len() - 1) % input.len()];
            let (cin, pin) = (inside(&cur), inside(&prev));
            if cin {
                if !pin {
                    out.push(intersect(prev, cur, a, b));
                }
                out.push(cur);
            } else if pin {
                out.push(intersect(prev, cur, a, b));
            }
        }
    }
    out
}

fn intersect(p: Point, q: Point, a: Point, b: Point) -> Point {
    let (dx, dy) = (q[0] - p[0], q[1] - p[1]);
    let (ex, ey) = (b[0] - a[0], b[1] - a[1]);
    let denom = dx * ey - dy * ex;
    if denom == 0.0 {
        return q;
    }
    let t = ((a[0] - p[0]) * ey - (a[1] - p[1]) * ex) / denom;
    [p[0] + t * dx, p[1] + t * dy]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overlapping_unit_squares() {
        let a = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
        let b = [[0.5, 0.25], [1.5, 0.25], [1.5, 1.25], [0.5, 1.25]];
        let c = clip_convex(&a, &b);
        assert!((polygon_area(&c) - 0.375).abs() < 1e-15);
    }

    #[test]
    fn disjoint_squares_clip_to_nothing() {
        let a = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
        let b = [[2.0, 0.0], [3.0, 0.0], [3.0, 1.0], [2.0, 1.0]];
        assert!(polygon_area(&clip_convex(&a, &b)) < 1e-15);
    }
}
