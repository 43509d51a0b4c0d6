//! Minimal 2D point arithmetic shared by the parser, normalizer and rasterizer.

use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const ORIGIN: Point = Point { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn distance(self, other: Point) -> f64 {
        (self - other).length()
    }

    pub fn length(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn lerp(self, other: Point, t: f64) -> Point {
        Point::new(self.x + (other.x - self.x) * t, self.y + (other.y - self.y) * t)
    }

    /// Reflection of `other` about `self` (`2·self − other`).
    pub fn reflect(self, other: Point) -> Point {
        Point::new(2.0 * self.x - other.x, 2.0 * self.y - other.y)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn map(self, f: impl Fn(f64) -> f64) -> Point {
        Point::new(f(self.x), f(self.y))
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, rhs: Point) -> Point {
        Point::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, rhs: Point) -> Point {
        Point::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    fn mul(self, rhs: f64) -> Point {
        Point::new(self.x * rhs, self.y * rhs)
    }
}

/// Distance from `p` to the infinite line through `a` and `b`
/// (or to `a` when the two coincide).
pub fn distance_to_line(p: Point, a: Point, b: Point) -> f64 {
    let d = b - a;
    let len = d.length();
    if len == 0.0 {
        return p.distance(a);
    }
    ((p.x - a.x) * d.y - (p.y - a.y) * d.x).abs() / len
}

/// Signed polygon area (shoelace); positive for counter-clockwise in a y-up frame.
pub fn signed_area(points: &[Point]) -> f64 {
    let n = points.len();
    if n < 3 {
        return 0.0;
    }
    let mut acc = 0.0;
    for i in 0..n {
        let a = points[i];
        let b = points[(i + 1) % n];
        acc += a.x * b.y - b.x * a.y;
    }
    acc * 0.5
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reflection_about_point() {
        let p = Point::new(10.0, 0.0);
        assert_eq!(p.reflect(Point::new(10.0, 10.0)), Point::new(10.0, -10.0));
    }

    #[test]
    fn shoelace_unit_square() {
        let sq = [
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(1.0, 1.0),
            Point::new(0.0, 1.0),
        ];
        assert_eq!(signed_area(&sq), 1.0);
    }

    #[test]
    fn line_distance() {
        let d = distance_to_line(Point::new(5.0, 3.0), Point::ORIGIN, Point::new(10.0, 0.0));
        assert!((d - 3.0).abs() < 1e-12);
    }
}
