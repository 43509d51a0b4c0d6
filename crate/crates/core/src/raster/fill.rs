use crate::geom::{signed_area, Point};
use crate::svg::FillRule;

use super::flatten::Polyline;

/// Sub-scanlines sampled per pixel row.
pub const SUBSAMPLES: usize = 4;

struct Edge {
    top: Point,
    bottom: Point,
    winding: i32,
}

/// Per-pixel coverage in `[0, 1]` of the given polygons, pixel coordinates.
/// Every polyline is treated as closed for filling.
pub fn coverage_mask(polygons: &[Vec<Point>], rule: FillRule, width: usize, height: usize) -> Vec<f32> {
    let mut mask = vec![0.0f32; width * height];
    let mut edges = Vec::new();
    for poly in polygons {
        let n = poly.len();
        if n < 2 {
            continue;
        }
        for i in 0..n {
            let a = poly[i];
            let b = poly[(i + 1) % n];
            if a.y == b.y {
                continue;
            }
            let (top, bottom, winding) = if a.y < b.y { (a, b, 1) } else { (b, a, -1) };
            edges.push(Edge { top, bottom, winding });
        }
    }
    if edges.is_empty() {
        return mask;
    }
    let ymin = edges.iter().map(|e| e.top.y).fold(f64::INFINITY, f64::min);
    let ymax = edges.iter().map(|e| e.bottom.y).fold(f64::NEG_INFINITY, f64::max);
    let row_start = ymin.floor().max(0.0) as usize;
    let row_end = (ymax.ceil().max(0.0) as usize).min(height);

    let weight = 1.0 / SUBSAMPLES as f64;
    let mut crossings: Vec<(f64, i32)> = Vec::new();
    let mut row = vec![0.0f64; width];
    for y in row_start..row_end {
        row.iter_mut().for_each(|v| *v = 0.0);
        for s in 0..SUBSAMPLES {
            let sy = y as f64 + (s as f64 + 0.5) * weight;
            crossings.clear();
            for e in &edges {
                if sy >= e.top.y && sy < e.bottom.y {
                    let t = (sy - e.top.y) / (e.bottom.y - e.top.y);
                    crossings.push((e.top.x + t * (e.bottom.x - e.top.x), e.winding));
                }
            }
            crossings.sort_by(|a, b| a.0.total_cmp(&b.0));
            let mut wind = 0;
            for pair in crossings.windows(2) {
                wind += pair[0].1;
                let inside = match rule {
                    FillRule::NonZero => wind != 0,
                    FillRule::EvenOdd => wind % 2 != 0,
                };
                if inside {
                    add_span(&mut row, pair[0].0, pair[1].0, weight);
                }
            }
        }
        let out = &mut mask[y * width..(y + 1) * width];
        for (m, v) in out.iter_mut().zip(&row) {
            *m = v.min(1.0) as f32;
        }
    }
    mask
}

/// Adds `weight` times the horizontal overlap of `[x0, x1)` with each pixel.
fn add_span(row: &mut [f64], x0: f64, x1: f64, weight: f64) {
    let w = row.len() as f64;
    let (x0, x1) = (x0.max(0.0), x1.min(w));
    if x1 <= x0 {
        return;
    }
    let first = x0.floor() as usize;
    let last = (x1.ceil() as usize).min(row.len()) - 1;
    if first == last {
        row[first] += (x1 - x0) * weight;
        return;
    }
    row[first] += (first as f64 + 1.0 - x0) * weight;
    for v in &mut row[first + 1..last] {
        *v += weight;
    }
    row[last] += (x1 - last as f64) * weight;
}

/// Outline polygons for a stroke: one quad per segment plus an octagon at each
/// join, all wound counter-clockwise so a nonzero fill yields their union.
pub fn stroke_polygons(line: &Polyline, width: f64) -> Vec<Vec<Point>> {
    let half = width / 2.0;
    let mut polys = Vec::new();
    if half <= 0.0 {
        return polys;
    }
    for (a, b) in line.edges() {
        let d = b - a;
        let len = d.length();
        if len == 0.0 {
            continue;
        }
        let n = Point::new(-d.y / len * half, d.x / len * half);
        polys.push(oriented(vec![a + n, b + n, b - n, a - n]));
    }
    let n = line.points.len();
    let joins: Box<dyn Iterator<Item = usize>> = if line.closed {
        Box::new(0..n)
    } else {
        Box::new(1..n.saturating_sub(1))
    };
    for i in joins {
        polys.push(octagon(line.points[i], half));
    }
    polys
}

fn octagon(center: Point, radius: f64) -> Vec<Point> {
    (0..8)
        .map(|k| {
            let t = k as f64 * std::f64::consts::FRAC_PI_4;
            Point::new(center.x + radius * t.cos(), center.y + radius * t.sin())
        })
        .collect()
}

fn oriented(mut poly: Vec<Point>) -> Vec<Point> {
    if signed_area(&poly) < 0.0 {
        poly.reverse();
    }
    poly
}
