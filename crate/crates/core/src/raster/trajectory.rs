use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::geom::Point;
use crate::svg::SvgDocument;

use super::flatten::{flatten_path, DEFAULT_TOLERANCE};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PenState {
    Up,
    Down,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySegment {
    pub pen: PenState,
    pub points: Vec<Point>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub segments: Vec<TrajectorySegment>,
}

impl Trajectory {
    /// Total length of all pen-down segments.
    pub fn drawn_length(&self) -> f64 {
        self.segments
            .iter()
            .filter(|s| s.pen == PenState::Down)
            .map(|s| s.points.windows(2).map(|w| w[0].distance(w[1])).sum::<f64>())
            .sum()
    }

    /// One `U x y` or `D x y` line per point.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for seg in &self.segments {
            let tag = match seg.pen {
                PenState::Up => 'U',
                PenState::Down => 'D',
            };
            for p in &seg.points {
                let _ = writeln!(out, "{tag} {} {}", p.x, p.y);
            }
        }
        out
    }
}

/// Pen path for drawing every subpath outline in order.
pub fn path_to_trajectory(doc: &SvgDocument, spacing: f64) -> Trajectory {
    assert!(spacing > 0.0, "spacing must be positive");
    let tolerance = DEFAULT_TOLERANCE.min(spacing / 4.0);
    let mut segments: Vec<TrajectorySegment> = Vec::new();
    let mut last: Option<Point> = None;
    for path in doc.paths() {
        for line in flatten_path(path.commands(), tolerance) {
            let mut vertices = line.points.clone();
            if line.closed && vertices.len() > 1 {
                vertices.push(vertices[0]);
            }
            let points = resample(&vertices, spacing);
            if let Some(prev) = last {
                if prev != points[0] {
                    segments.push(TrajectorySegment { pen: PenState::Up, points: vec![prev, points[0]] });
                }
            }
            last = points.last().copied();
            segments.push(TrajectorySegment { pen: PenState::Down, points });
        }
    }
    Trajectory { segments }
}

/// Subdivides each edge evenly so no step exceeds `spacing`; drops repeats.
fn resample(vertices: &[Point], spacing: f64) -> Vec<Point> {
    let mut out = vec![vertices[0]];
    for w in vertices.windows(2) {
        let (a, b) = (w[0], w[1]);
        let len = a.distance(b);
        if len == 0.0 {
            continue;
        }
        let steps = (len / spacing - 1e-9).ceil().max(1.0) as usize;
        for k in 1..=steps {
            let q = if k == steps { b } else { a.lerp(b, k as f64 / steps as f64) };
            if out.last() != Some(&q) {
                out.push(q);
            }
        }
    }
    out
}
