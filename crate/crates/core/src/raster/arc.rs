//! Endpoint-to-center conversion of SVG elliptical arcs and their cubic approximation.

use std::f64::consts::{FRAC_PI_2, TAU};

use crate::geom::Point;
use crate::svg::ArcSegment;

/// Center parameterization of an elliptical arc. Angles in radians.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CenterArc {
    pub center: Point,
    pub rx: f64,
    pub ry: f64,
    pub rotation: f64,
    pub start_angle: f64,
    pub sweep_angle: f64,
}

/// How an arc command renders.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ArcShape {
    /// Endpoints coincide: the arc is omitted.
    Omitted,
    /// A zero radius degrades the arc to a straight line.
    Line,
    Elliptic(CenterArc),
}

pub fn endpoint_to_center(from: Point, arc: &ArcSegment) -> ArcShape {
    let to = arc.to;
    if from == to {
        return ArcShape::Omitted;
    }
    let (mut rx, mut ry) = (arc.rx.abs(), arc.ry.abs());
    if rx == 0.0 || ry == 0.0 {
        return ArcShape::Line;
    }
    let phi = arc.x_rotation.to_radians();
    let (sin, cos) = phi.sin_cos();
    let dx2 = (from.x - to.x) / 2.0;
    let dy2 = (from.y - to.y) / 2.0;
    let x1 = cos * dx2 + sin * dy2;
    let y1 = -sin * dx2 + cos * dy2;

    // Radii too small to span the endpoints are scaled up uniformly.
    let lambda = (x1 * x1) / (rx * rx) + (y1 * y1) / (ry * ry);
    if lambda > 1.0 {
        let s = lambda.sqrt();
        rx *= s;
        ry *= s;
    }

    let (rx2, ry2) = (rx * rx, ry * ry);
    let num = rx2 * ry2 - rx2 * y1 * y1 - ry2 * x1 * x1;
    let den = rx2 * y1 * y1 + ry2 * x1 * x1;
    let mut coef = (num / den).max(0.0).sqrt();
    if arc.large_arc == arc.sweep {
        coef = -coef;
    }
    let cxp = coef * rx * y1 / ry;
    let cyp = -coef * ry * x1 / rx;
    let center = Point::new(
        cos * cxp - sin * cyp + (from.x + to.x) / 2.0,
        sin * cxp + cos * cyp + (from.y + to.y) / 2.0,
    );

    let ux = (x1 - cxp) / rx;
    let uy = (y1 - cyp) / ry;
    let vx = (-x1 - cxp) / rx;
    let vy = (-y1 - cyp) / ry;
    let start_angle = uy.atan2(ux);
    let mut sweep_angle = (ux * vy - uy * vx).atan2(ux * vx + uy * vy);
    if !arc.sweep && sweep_angle > 0.0 {
        sweep_angle -= TAU;
    } else if arc.sweep && sweep_angle < 0.0 {
        sweep_angle += TAU;
    }
    ArcShape::Elliptic(CenterArc {
        center,
        rx,
        ry,
        rotation: phi,
        start_angle,
        sweep_angle,
    })
}

impl CenterArc {
    /// Point on the (rotated) ellipse at parametric angle `theta`.
    pub fn point_at(&self, theta: f64) -> Point {
        let (s, c) = theta.sin_cos();
        self.map_unit(Point::new(c, s))
    }

    fn map_unit(&self, p: Point) -> Point {
        let (sin, cos) = self.rotation.sin_cos();
        let x = p.x * self.rx;
        let y = p.y * self.ry;
        Point::new(
            cos * x - sin * y + self.center.x,
            sin * x + cos * y + self.center.y,
        )
    }

    /// Splits into sweeps of at most 90° and approximates each with one cubic.
    /// Returns `[start, ctrl1, ctrl2, end]` per piece.
    pub fn to_cubics(&self) -> Vec<[Point; 4]> {
        let pieces = ((self.sweep_angle.abs() / FRAC_PI_2) - 1e-9).ceil().max(1.0) as usize;
        let step = self.sweep_angle / pieces as f64;
        let k = 4.0 / 3.0 * (step / 4.0).tan();
        (0..pieces)
            .map(|i| {
                let t1 = self.start_angle + step * i as f64;
                let t2 = t1 + step;
                let (s1, c1) = t1.sin_cos();
                let (s2, c2) = t2.sin_cos();
                let e1 = Point::new(c1, s1);
                let e2 = Point::new(c2, s2);
                let ctrl1 = Point::new(c1 - k * s1, s1 + k * c1);
                let ctrl2 = Point::new(c2 + k * s2, s2 - k * c2);
                [self.map_unit(e1), self.map_unit(ctrl1), self.map_unit(ctrl2), self.map_unit(e2)]
            })
            .collect()
    }
}

/// Cubic pieces for an arc command starting at `from`, with the first and
/// last points pinned to the exact endpoints. Empty when the arc is omitted;
/// a single straight cubic when it degrades to a line.
pub fn arc_to_cubics(from: Point, arc: &ArcSegment) -> Vec<[Point; 4]> {
    match endpoint_to_center(from, arc) {
        ArcShape::Omitted => vec![],
        ArcShape::Line => vec![[from, from, arc.to, arc.to]],
        ArcShape::Elliptic(center) => {
            let mut cubics = center.to_cubics();
            if let Some(first) = cubics.first_mut() {
                first[0] = from;
            }
            if let Some(last) = cubics.last_mut() {
                last[3] = arc.to;
            }
            cubics
        }
    }
}
