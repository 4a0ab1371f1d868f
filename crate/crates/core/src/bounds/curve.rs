//! Piecewise-smooth plane curves and the boundary rate functionals.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::numeric::{integrate, Quadrature};
use crate::error::{Error, Result};
use crate::geometry::Point;

/// Scale of the limiting staircase curve, `pi / sqrt(6)`.
pub const VERSHIK_SCALE: f64 = 1.282_549_830_161_864;

/// Unit in which entropies and rates are reported.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LogBase {
    #[default]
    Natural,
    Two,
}

impl LogBase {
    /// Factor converting a value in nats to this unit.
    pub fn from_nats(self) -> f64 {
        match self {
            LogBase::Natural => 1.0,
            LogBase::Two => 1.0 / std::f64::consts::LN_2,
        }
    }
}

/// Binary entropy in nats. Errors outside `[0, 1]`.
pub fn entropy(q: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::InvalidArgument(format!("entropy argument {q} outside [0, 1]")));
    }
    Ok(entropy_nats(q))
}

/// Binary entropy in the given unit.
pub fn entropy_in(q: f64, base: LogBase) -> Result<f64> {
    Ok(entropy(q)? * base.from_nats())
}

fn entropy_nats(q: f64) -> f64 {
    let term = |x: f64| if x <= 0.0 { 0.0 } else { -x * x.ln() };
    term(q) + term(1.0 - q)
}

/// Affine map `x -> matrix * x + offset`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Affine {
    pub matrix: [[f64; 2]; 2],
    pub offset: Point,
}

impl Affine {
    pub const IDENTITY: Affine = Affine {
        matrix: [[1.0, 0.0], [0.0, 1.0]],
        offset: [0.0, 0.0],
    };

    pub fn new(matrix: [[f64; 2]; 2], offset: Point) -> Self {
        Self { matrix, offset }
    }

    fn linear(&self, v: Point) -> Point {
        let m = &self.matrix;
        [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]]
    }

    fn apply(&self, v: Point) -> Point {
        let l = self.linear(v);
        [l[0] + self.offset[0], l[1] + self.offset[1]]
    }
}

impl Default for Affine {
    fn default() -> Self {
        Self::IDENTITY
    }
}

/// Base geometry of a curve piece before its affine map.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PieceShape {
    /// Straight segment, parameter in `[0, 1]`.
    Segment { from: Point, to: Point },
    /// Arc of the limiting staircase curve `exp(-cx) + exp(-cy) = 1`,
    /// parameterized by `u = exp(-cx)` over `[u_start, u_end]` within `[0, 1]`.
    Vershik { u_start: f64, u_end: f64 },
    /// Arc `(a cos t, b sin t)` for `t` in `[t_start, t_end]`.
    Ellipse { a: f64, b: f64, t_start: f64, t_end: f64 },
}

/// One smooth piece of a curve.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvePiece {
    pub shape: PieceShape,
    #[serde(default)]
    pub map: Affine,
    /// Traverse the parameter range backwards.
    #[serde(default)]
    pub reversed: bool,
}

/// Position with first and second derivatives.
#[derive(Clone, Copy, Debug)]
pub struct Jet {
    pub pos: Point,
    pub d1: Point,
    pub d2: Point,
}

impl CurvePiece {
    pub fn new(shape: PieceShape) -> Self {
        Self {
            shape,
            map: Affine::IDENTITY,
            reversed: false,
        }
    }

    pub fn segment(from: Point, to: Point) -> Self {
        Self::new(PieceShape::Segment { from, to })
    }

    pub fn mapped(mut self, map: Affine) -> Self {
        self.map = map;
        self
    }

    pub fn reversed(mut self) -> Self {
        self.reversed = !self.reversed;
        self
    }

    /// Parameter interval as traversed before reversal.
    pub fn range(&self) -> (f64, f64) {
        match self.shape {
            PieceShape::Segment { .. } => (0.0, 1.0),
            PieceShape::Vershik { u_start, u_end } => (u_start, u_end),
            PieceShape::Ellipse { t_start, t_end, .. } => (t_start, t_end),
        }
    }

    fn validate(&self) -> Result<()> {
        match self.shape {
            PieceShape::Vershik { u_start, u_end } => {
                if !(0.0..=1.0).contains(&u_start) || !(0.0..=1.0).contains(&u_end) || u_start == u_end {
                    return Err(Error::BadCurve("staircase arc parameters must be distinct and in [0, 1]"));
                }
            }
            PieceShape::Ellipse { a, b, t_start, t_end } => {
                if a <= 0.0 || b <= 0.0 || t_start == t_end {
                    return Err(Error::BadCurve("ellipse needs positive semi-axes and a nonempty arc"));
                }
            }
            PieceShape::Segment { from, to } => {
                if from == to {
                    return Err(Error::BadCurve("degenerate segment"));
                }
            }
        }
        if self.map.matrix.iter().flatten().chain(&self.map.offset).any(|v| !v.is_finite()) {
            return Err(Error::BadCurve("non-finite affine map"));
        }
        Ok(())
    }

    fn base_jet(&self, t: f64) -> Jet {
        match self.shape {
            PieceShape::Segment { from, to } => {
                let d = [to[0] - from[0], to[1] - from[1]];
                Jet {
                    pos: [from[0] + t * d[0], from[1] + t * d[1]],
                    d1: d,
                    d2: [0.0, 0.0],
                }
            }
            PieceShape::Vershik { .. } => {
                let c = VERSHIK_SCALE;
                let v = 1.0 - t;
                Jet {
                    pos: [-t.ln() / c, -v.ln() / c],
                    d1: [-1.0 / (c * t), 1.0 / (c * v)],
                    d2: [1.0 / (c * t * t), 1.0 / (c * v * v)],
                }
            }
            PieceShape::Ellipse { a, b, .. } => {
                let (s, co) = t.sin_cos();
                Jet {
                    pos: [a * co, b * s],
                    d1: [-a * s, b * co],
                    d2: [-a * co, -b * s],
                }
            }
        }
    }

    /// Position and derivatives at `s` in `[0, 1]`, following traversal direction.
    pub fn jet(&self, s: f64) -> Jet {
        let (t0, t1) = self.range();
        let (t, sign) = if self.reversed {
            (t1 + s * (t0 - t1), -1.0)
        } else {
            (t0 + s * (t1 - t0), 1.0)
        };
        let speed = (t1 - t0) * sign;
        let j = self.base_jet(t);
        let d1 = self.map.linear(j.d1);
        let d2 = self.map.linear(j.d2);
        Jet {
            pos: self.map.apply(j.pos),
            d1: [d1[0] * speed, d1[1] * speed],
            d2: [d2[0] * speed * speed, d2[1] * speed * speed],
        }
    }

    pub fn start(&self) -> Point {
        self.jet(0.0).pos
    }

    pub fn end(&self) -> Point {
        self.jet(1.0).pos
    }
}

/// Curve built from consecutive smooth pieces.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PlaneCurve {
    pub pieces: Vec<CurvePiece>,
}

const SAMPLES_PER_PIECE: usize = 129;
const QUAD_TOL: f64 = 1e-12;

impl PlaneCurve {
    pub fn new(pieces: Vec<CurvePiece>) -> Result<Self> {
        if pieces.is_empty() {
            return Err(Error::BadCurve("curve has no pieces"));
        }
        for p in &pieces {
            p.validate()?;
        }
        Ok(Self { pieces })
    }

    /// Closed polygon through `vertices`.
    pub fn polygon(vertices: &[Point]) -> Result<Self> {
        if vertices.len() < 3 {
            return Err(Error::BadCurve("polygon needs at least three vertices"));
        }
        let n = vertices.len();
        Self::new((0..n).map(|i| CurvePiece::segment(vertices[i], vertices[(i + 1) % n])).collect())
    }

    /// Full ellipse with semi-axes `a` and `b`.
    pub fn ellipse(a: f64, b: f64) -> Result<Self> {
        Self::new(vec![CurvePiece::new(PieceShape::Ellipse {
            a,
            b,
            t_start: 0.0,
            t_end: 2.0 * PI,
        })])
    }

    /// True when consecutive pieces meet and the last returns to the first.
    pub fn is_closed(&self, tol: f64) -> bool {
        let n = self.pieces.len();
        (0..n).all(|i| dist(self.pieces[i].end(), self.pieces[(i + 1) % n].start()) <= tol)
    }

    fn interior_samples(&self) -> Vec<Jet> {
        self.pieces
            .iter()
            .flat_map(|p| (0..SAMPLES_PER_PIECE).map(move |k| p.jet((k as f64 + 0.5) / SAMPLES_PER_PIECE as f64)))
            .collect()
    }

    /// Each coordinate changes direction at most twice around the curve.
    pub fn is_coordinate_unimodal(&self) -> bool {
        let samples = self.interior_samples();
        let closed = self.is_closed(1e-9);
        (0..2).all(|axis| {
            let scale = samples.iter().map(|j| j.d1[axis].abs()).fold(0.0, f64::max);
            let signs: Vec<f64> = samples.iter().map(|j| j.d1[axis]).filter(|v| v.abs() > 1e-9 * scale).map(f64::signum).collect();
            let mut changes = signs.windows(2).filter(|w| w[0] != w[1]).count();
            if closed && signs.len() > 1 && signs[0] != signs[signs.len() - 1] {
                changes += 1;
            }
            changes <= 2
        })
    }

    /// Turning is one-signed and the total turn is at most a full revolution.
    pub fn is_convex(&self) -> bool {
        let samples = self.interior_samples();
        let mut sign = 0.0;
        let mut total = 0.0;
        let n = samples.len();
        let closed = self.is_closed(1e-9);
        let count = if closed { n } else { n - 1 };
        for i in 0..count {
            let a = samples[i].d1;
            let b = samples[(i + 1) % n].d1;
            let turn = (a[0] * b[1] - a[1] * b[0]).atan2(a[0] * b[0] + a[1] * b[1]);
            if turn.abs() > 1e-12 {
                if sign != 0.0 && turn.signum() != sign {
                    return false;
                }
                sign = turn.signum();
                total += turn.abs();
            }
        }
        for j in &samples {
            let cross = j.d1[0] * j.d2[1] - j.d1[1] * j.d2[0];
            let scale = (j.d1[0].hypot(j.d1[1])).powi(3);
            if sign != 0.0 && cross.abs() > 1e-9 * scale && cross.signum() != sign {
                return false;
            }
        }
        total <= 2.0 * PI + 1e-6
    }

    /// Boundary cost for lattice-polyomino approximation:
    /// the integral of `H(|y'| / (|x'| + |y'|)) (|x'| + |y'|)` along the curve.
    pub fn rate_polyomino(&self, base: LogBase) -> Result<Quadrature> {
        if !self.is_coordinate_unimodal() {
            return Err(Error::BadCurve("curve is not coordinate-unimodal"));
        }
        Ok(self.integrate(base, |j| {
            let (dx, dy) = (j.d1[0].abs(), j.d1[1].abs());
            let l1 = dx + dy;
            if l1 == 0.0 || !l1.is_finite() {
                return 0.0;
            }
            entropy_nats(dy / l1) * l1
        }))
    }

    /// Boundary cost for convex-polygon approximation: the affine arc length
    /// times `(3 / 2^(2/3)) (zeta(3) / zeta(2))^(1/3)`.
    pub fn rate_polygon(&self, base: LogBase) -> Result<Quadrature> {
        if !self.is_convex() {
            return Err(Error::BadCurve("curve is not convex"));
        }
        let pre = polygon_prefactor();
        let q = self.integrate(base, |j| (j.d1[0] * j.d2[1] - j.d1[1] * j.d2[0]).abs().cbrt());
        Ok(Quadrature {
            value: q.value * pre,
            error: q.error * pre,
        })
    }

    fn integrate(&self, base: LogBase, f: impl Fn(&Jet) -> f64) -> Quadrature {
        let scale = base.from_nats();
        let mut total = Quadrature { value: 0.0, error: 0.0 };
        for p in &self.pieces {
            let q = integrate(|s| f(&p.jet(s)), 0.0, 1.0, QUAD_TOL, QUAD_TOL);
            total.value += q.value;
            total.error += q.error;
        }
        Quadrature {
            value: total.value * scale,
            error: total.error * scale,
        }
    }
}

/// `(3 / 2^(2/3)) (zeta(3) / zeta(2))^(1/3)`.
pub fn polygon_prefactor() -> f64 {
    const ZETA3: f64 = 1.202_056_903_159_594_2;
    let zeta2 = PI * PI / 6.0;
    3.0 / 2f64.powf(2.0 / 3.0) * (ZETA3 / zeta2).cbrt()
}

fn dist(a: Point, b: Point) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn entropy_values() {
        assert_eq!(entropy(0.0).unwrap(), 0.0);
        assert!((entropy(0.5).unwrap() - std::f64::consts::LN_2).abs() < 1e-15);
        assert!((entropy_in(0.5, LogBase::Two).unwrap() - 1.0).abs() < 1e-15);
        assert!(entropy(1.5).is_err());
        assert!(entropy(-0.1).is_err());
    }

    #[test]
    fn scale_constant() {
        assert!((VERSHIK_SCALE - PI / 6f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn axis_aligned_square_costs_nothing() {
        let c = PlaneCurve::polygon(&[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]).unwrap();
        assert!(c.is_closed(1e-12));
        assert!(c.rate_polyomino(LogBase::Natural).unwrap().value.abs() < 1e-14);
        assert!(c.rate_polygon(LogBase::Natural).unwrap().value.abs() < 1e-14);
    }

    #[test]
    fn diagonal_segment_rate() {
        // slope one: H(1/2) per unit of l1 length, l1 length 2
        let c = PlaneCurve::new(vec![CurvePiece::segment([0.0, 0.0], [1.0, 1.0])]).unwrap();
        let r = c.rate_polyomino(LogBase::Natural).unwrap().value;
        assert!((r - 2.0 * std::f64::consts::LN_2).abs() < 1e-13);
    }

    #[test]
    fn full_staircase_curve_rate() {
        let c = PlaneCurve::new(vec![CurvePiece::new(PieceShape::Vershik { u_start: 0.0, u_end: 1.0 })]).unwrap();
        let r = c.rate_polyomino(LogBase::Natural).unwrap();
        assert!((r.value - PI * (2.0f64 / 3.0).sqrt()).abs() < 1e-9, "{r:?}");
    }

    #[test]
    fn circle_affine_length() {
        // affine arc length of a circle of radius r is 2 pi r^(2/3)
        let c = PlaneCurve::ellipse(2.0, 2.0).unwrap();
        let r = c.rate_polygon(LogBase::Natural).unwrap().value;
        let expect = polygon_prefactor() * 2.0 * PI * 2f64.powf(2.0 / 3.0);
        assert!((r - expect).abs() < 1e-10);
    }

    #[test]
    fn checks_reject_bad_shapes() {
        let zigzag = PlaneCurve::polygon(&[[0.0, 0.0], [1.0, 1.0], [2.0, 0.0], [3.0, 1.0], [3.0, 2.0], [0.0, 2.0]]).unwrap();
        assert!(!zigzag.is_coordinate_unimodal());
        assert!(!zigzag.is_convex());
        assert!(zigzag.rate_polyomino(LogBase::Natural).is_err());
        let ell = PlaneCurve::ellipse(3.0, 1.0).unwrap();
        assert!(ell.is_convex() && ell.is_coordinate_unimodal());
    }
}
