//! Fixed-shape-ratio extremal curves built from the limiting staircase curve.
//!
//! The curve `exp(-cx) + exp(-cy) = 1` is cut between abscissae `a < b` so that
//! its bounding box is a square of side `s = b - a`. Four copies glued around
//! the origin enclose a shape whose circumscribed-square perimeter over the
//! square root of its area is `beta`.

use serde::{Deserialize, Serialize};

use super::curve::{Affine, CurvePiece, LogBase, PieceShape, PlaneCurve, VERSHIK_SCALE};
use super::numeric::{brent, integrate};
use crate::error::{Error, Result};

/// Height of the staircase curve above abscissa `x > 0`.
pub fn vershik_y(x: f64) -> f64 {
    -(-(-VERSHIK_SCALE * x).exp_m1()).ln() / VERSHIK_SCALE
}

/// Abscissa where the curve crosses the diagonal.
pub fn vershik_midpoint() -> f64 {
    std::f64::consts::LN_2 / VERSHIK_SCALE
}

/// One cut of the staircase curve with a square bounding box.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VershikSegment {
    pub a: f64,
    pub b: f64,
    pub beta: f64,
    /// Area between the arc and its square's outer corner.
    pub cut_area: f64,
    pub curve: PlaneCurve,
}

impl VershikSegment {
    pub fn side(&self) -> f64 {
        self.b - self.a
    }

    /// `|width - height|` of the bounding box.
    pub fn square_residual(&self) -> f64 {
        ((self.b - self.a) - (vershik_y(self.a) - vershik_y(self.b))).abs()
    }

    /// Area of the shape enclosed by the four glued copies.
    pub fn enclosed_area(&self) -> f64 {
        4.0 * (self.side().powi(2) - self.cut_area)
    }

    /// Closed curve made of four rotated and reflected copies of the arc.
    pub fn closed_curve(&self) -> PlaneCurve {
        let base = self.curve.pieces[0];
        let (b, ya) = (self.b, vershik_y(self.a));
        let quarter = |m: [[f64; 2]; 2], off: [f64; 2], rev: bool| {
            let p = base.mapped(Affine::new(m, off));
            if rev {
                p.reversed()
            } else {
                p
            }
        };
        PlaneCurve {
            pieces: vec![
                quarter([[-1.0, 0.0], [0.0, -1.0]], [b, ya], false),
                quarter([[-1.0, 0.0], [0.0, 1.0]], [b, -ya], true),
                quarter([[1.0, 0.0], [0.0, 1.0]], [-b, -ya], false),
                quarter([[1.0, 0.0], [0.0, -1.0]], [-b, ya], true),
            ],
        }
    }
}

/// Right endpoint `b` for a left endpoint `a` below the midpoint.
fn partner(a: f64) -> Result<f64> {
    let ya = vershik_y(a);
    let mid = vershik_midpoint();
    brent(|b| (b - a) - (ya - vershik_y(b)), mid, ya + 1.0, 1e-15 * ya.max(1.0))
}

fn cut_area(a: f64, b: f64) -> f64 {
    let yb = vershik_y(b);
    integrate(|x| vershik_y(x) - yb, a, b, 1e-14, 1e-14).value
}

fn beta_at(a: f64) -> Result<(f64, f64, f64)> {
    let b = partner(a)?;
    let s = b - a;
    let area = cut_area(a, b);
    Ok((4.0 * s / (s * s - area).sqrt(), b, area))
}

/// Cut the staircase curve so the glued shape has ratio `beta`.
///
/// Feasible ratios lie strictly between the square (4) and the diamond
/// (`4 sqrt 2`); ratios within about `1e-5` of 4 need cuts closer to the axis
/// than double precision resolves and are rejected.
pub fn vershik_segment(beta: f64) -> Result<VershikSegment> {
    let lo_beta = 4.0;
    let hi_beta = 4.0 * std::f64::consts::SQRT_2;
    if !(beta > lo_beta && beta < hi_beta) {
        return Err(Error::Infeasible(format!("shape ratio {beta} outside (4, 4 sqrt 2)")));
    }
    let mid = vershik_midpoint();
    let a_lo = 1e-300;
    let a_hi = mid * (1.0 - 1e-6);
    let f = |a: f64| beta_at(a).map(|(v, _, _)| v - beta).unwrap_or(f64::NAN);
    if f(a_lo) > 0.0 {
        return Err(Error::Infeasible(format!("shape ratio {beta} too close to 4")));
    }
    if f(a_hi) < 0.0 {
        return Err(Error::Infeasible(format!("shape ratio {beta} too close to 4 sqrt 2")));
    }
    // solve in log space: the relevant cuts span hundreds of decades
    let la = brent(|t| f(t.exp()), a_lo.ln(), a_hi.ln(), 1e-14)?;
    let a = la.exp();
    let (got, b, area) = beta_at(a)?;
    if (got - beta).abs() > 1e-8 {
        return Err(Error::RootFinding(format!("shape ratio residual {}", (got - beta).abs())));
    }
    let c = VERSHIK_SCALE;
    let piece = CurvePiece::new(PieceShape::Vershik {
        u_start: (-c * b).exp(),
        u_end: (-c * a).exp(),
    });
    Ok(VershikSegment {
        a,
        b,
        beta: got,
        cut_area: area,
        curve: PlaneCurve { pieces: vec![piece] },
    })
}

/// Boundary constant for the fixed-ratio family: four times the rate of one arc.
pub fn c_beta(beta: f64, base: LogBase) -> Result<f64> {
    let seg = vershik_segment(beta)?;
    Ok(4.0 * seg.curve.rate_polyomino(base)?.value)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn endpoints_on_curve_and_square() {
        for beta in [4.05, 4.5, 5.0, 5.5] {
            let s = vershik_segment(beta).unwrap();
            let c = VERSHIK_SCALE;
            let on = (-c * s.a).exp() + (-c * vershik_y(s.a)).exp() - 1.0;
            assert!(on.abs() < 1e-10);
            assert!(s.square_residual() < 1e-8, "{}", s.square_residual());
            assert!((s.beta - beta).abs() < 1e-8);
            let q = 8.0 * s.side() / s.enclosed_area().sqrt();
            assert!((q - beta).abs() < 1e-8);
        }
    }

    #[test]
    fn closed_curve_is_closed_and_additive() {
        let s = vershik_segment(4.8).unwrap();
        let closed = s.closed_curve();
        assert!(closed.is_closed(1e-9));
        assert!(closed.is_convex());
        let whole = closed.rate_polyomino(LogBase::Natural).unwrap().value;
        let one = s.curve.rate_polyomino(LogBase::Natural).unwrap().value;
        assert!((whole - 4.0 * one).abs() < 1e-9);
    }

    #[test]
    fn infeasible_ratios() {
        assert!(vershik_segment(4.0).is_err());
        assert!(vershik_segment(3.0).is_err());
        assert!(vershik_segment(6.0).is_err());
    }

    #[test]
    fn midpoint_on_diagonal() {
        let m = vershik_midpoint();
        assert!((vershik_y(m) - m).abs() < 1e-14);
    }
}
