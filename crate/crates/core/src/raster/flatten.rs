use crate::geom::Point;
use crate::svg::PathCommand;

use super::arc::arc_to_cubics;

pub const DEFAULT_TOLERANCE: f64 = 0.25;

const MAX_DEPTH: u32 = 16;

/// A flattened subpath. For closed polylines the closing edge back to the
/// first point is implicit and the first point is not repeated.
#[derive(Clone, Debug, PartialEq)]
pub struct Polyline {
    pub points: Vec<Point>,
    pub closed: bool,
}

impl Polyline {
    /// Edges in order, including the closing edge for closed polylines.
    pub fn edges(&self) -> impl Iterator<Item = (Point, Point)> + '_ {
        let n = self.points.len();
        let count = if self.closed && n > 1 { n } else { n.saturating_sub(1) };
        (0..count).map(move |i| (self.points[i], self.points[(i + 1) % n]))
    }

    pub fn length(&self) -> f64 {
        self.edges().map(|(a, b)| a.distance(b)).sum()
    }
}

fn distance_to_segment(p: Point, a: Point, b: Point) -> f64 {
    let ab = b - a;
    let len2 = ab.x * ab.x + ab.y * ab.y;
    if len2 == 0.0 {
        return p.distance(a);
    }
    let t = (((p.x - a.x) * ab.x + (p.y - a.y) * ab.y) / len2).clamp(0.0, 1.0);
    p.distance(a + ab * t)
}

/// Appends points of the cubic after `p0` (which is assumed already emitted).
pub fn flatten_cubic(p0: Point, p1: Point, p2: Point, p3: Point, tolerance: f64, out: &mut Vec<Point>) {
    subdivide(p0, p1, p2, p3, tolerance, 0, out);
}

fn subdivide(p0: Point, p1: Point, p2: Point, p3: Point, tol: f64, depth: u32, out: &mut Vec<Point>) {
    let flatness = distance_to_segment(p1, p0, p3).max(distance_to_segment(p2, p0, p3));
    if flatness <= tol || depth >= MAX_DEPTH {
        out.push(p3);
        return;
    }
    let p01 = p0.lerp(p1, 0.5);
    let p12 = p1.lerp(p2, 0.5);
    let p23 = p2.lerp(p3, 0.5);
    let p012 = p01.lerp(p12, 0.5);
    let p123 = p12.lerp(p23, 0.5);
    let mid = p012.lerp(p123, 0.5);
    subdivide(p0, p01, p012, mid, tol, depth + 1, out);
    subdivide(mid, p123, p23, p3, tol, depth + 1, out);
}

pub(crate) fn quad_to_cubic(p0: Point, ctrl: Point, to: Point) -> (Point, Point) {
    (p0 + (ctrl - p0) * (2.0 / 3.0), to + (ctrl - to) * (2.0 / 3.0))
}

/// Flattens path commands into one polyline per subpath.
pub fn flatten_path(commands: &[PathCommand], tolerance: f64) -> Vec<Polyline> {
    assert!(tolerance > 0.0, "tolerance must be positive");
    let mut result = Vec::new();
    let mut current: Vec<Point> = Vec::new();
    let mut pen = Point::ORIGIN;

    let finish = |points: &mut Vec<Point>, closed: bool, result: &mut Vec<Polyline>| {
        let mut pts = std::mem::take(points);
        if closed && pts.len() > 1 && pts.first() == pts.last() {
            pts.pop();
        }
        if !pts.is_empty() {
            result.push(Polyline { points: pts, closed });
        }
    };

    for cmd in commands {
        match *cmd {
            PathCommand::MoveTo(p) => {
                finish(&mut current, false, &mut result);
                current.push(p);
                pen = p;
            }
            PathCommand::LineTo(p) => {
                current.push(p);
                pen = p;
            }
            PathCommand::CubicTo { ctrl1, ctrl2, to } => {
                flatten_cubic(pen, ctrl1, ctrl2, to, tolerance, &mut current);
                pen = to;
            }
            PathCommand::QuadTo { ctrl, to } => {
                let (c1, c2) = quad_to_cubic(pen, ctrl, to);
                flatten_cubic(pen, c1, c2, to, tolerance, &mut current);
                pen = to;
            }
            PathCommand::ArcTo(ref arc) => {
                for [p0, c1, c2, p3] in arc_to_cubics(pen, arc) {
                    flatten_cubic(p0, c1, c2, p3, tolerance, &mut current);
                }
                pen = arc.to;
            }
            PathCommand::Close => {
                let start = current.first().copied();
                finish(&mut current, true, &mut result);
                if let Some(s) = start {
                    pen = s;
                }
            }
        }
    }
    finish(&mut current, false, &mut result);
    result
}
