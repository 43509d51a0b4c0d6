//! Lowering to the canonical dataset form: absolute `{M, L, C, Q, A, Z}` commands
//! on a 200×200 viewbox with integer coordinates where rounding keeps the geometry.

use thiserror::Error;

use crate::geom::Point;
use crate::raster::arc::{endpoint_to_center, ArcShape};
use crate::svg::write::round_to_hundredths;
use crate::svg::{ArcSegment, ParsedSvg, PathCommand, RawCommand, SvgDocument, SvgError, SvgPath, ViewBox};

/// Side length of the canonical viewbox.
pub const CANONICAL_SIDE: f64 = 200.0;

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum LowerError {
    #[error("path data does not start with a move command")]
    StartsWithoutMove,
    #[error("unknown command letter '{0}'")]
    UnknownLetter(char),
}

#[derive(Default)]
struct Lowering {
    out: Vec<PathCommand>,
    current: Option<Point>,
    subpath_start: Point,
    after_close: bool,
    /// Second control of the previous C (for S reflection).
    last_cubic_ctrl: Option<Point>,
    /// Control of the previous Q (for T reflection).
    last_quad_ctrl: Option<Point>,
}

impl Lowering {
    /// Current point for a drawing command, reopening the subpath after `Z`.
    fn begin_segment(&mut self) -> Result<Point, LowerError> {
        let cur = self.current.ok_or(LowerError::StartsWithoutMove)?;
        if self.after_close {
            self.out.push(PathCommand::MoveTo(cur));
            self.subpath_start = cur;
            self.after_close = false;
        }
        Ok(cur)
    }

    fn emit(&mut self, cmd: PathCommand, cubic: Option<Point>, quad: Option<Point>) {
        if let Some(end) = cmd.end_point() {
            self.current = Some(end);
        }
        self.last_cubic_ctrl = cubic;
        self.last_quad_ctrl = quad;
        self.out.push(cmd);
    }

    fn group(&mut self, letter: char, index: usize, g: &[f64]) -> Result<(), LowerError> {
        let relative = letter.is_ascii_lowercase();
        let upper = letter.to_ascii_uppercase();
        if upper == 'M' && index == 0 {
            let base = if relative { self.current.unwrap_or(Point::ORIGIN) } else { Point::ORIGIN };
            let p = base + Point::new(g[0], g[1]);
            self.after_close = false;
            self.subpath_start = p;
            self.emit(PathCommand::MoveTo(p), None, None);
            return Ok(());
        }
        let cur = self.begin_segment()?;
        let base = if relative { cur } else { Point::ORIGIN };
        let pt = |x: f64, y: f64| base + Point::new(x, y);
        match upper {
            // Implicit repetitions of M are line-tos.
            'M' | 'L' => self.emit(PathCommand::LineTo(pt(g[0], g[1])), None, None),
            'H' => {
                let x = if relative { cur.x + g[0] } else { g[0] };
                self.emit(PathCommand::LineTo(Point::new(x, cur.y)), None, None)
            }
            'V' => {
                let y = if relative { cur.y + g[0] } else { g[0] };
                self.emit(PathCommand::LineTo(Point::new(cur.x, y)), None, None)
            }
            'C' => {
                let (ctrl1, ctrl2, to) = (pt(g[0], g[1]), pt(g[2], g[3]), pt(g[4], g[5]));
                self.emit(PathCommand::CubicTo { ctrl1, ctrl2, to }, Some(ctrl2), None)
            }
            'S' => {
                let ctrl1 = self.last_cubic_ctrl.map_or(cur, |c| cur.reflect(c));
                let (ctrl2, to) = (pt(g[0], g[1]), pt(g[2], g[3]));
                self.emit(PathCommand::CubicTo { ctrl1, ctrl2, to }, Some(ctrl2), None)
            }
            'Q' => {
                let (ctrl, to) = (pt(g[0], g[1]), pt(g[2], g[3]));
                self.emit(PathCommand::QuadTo { ctrl, to }, None, Some(ctrl))
            }
            'T' => {
                let ctrl = self.last_quad_ctrl.map_or(cur, |c| cur.reflect(c));
                let to = pt(g[0], g[1]);
                self.emit(PathCommand::QuadTo { ctrl, to }, None, Some(ctrl))
            }
            'A' => {
                let arc = ArcSegment {
                    rx: g[0].abs(),
                    ry: g[1].abs(),
                    x_rotation: g[2],
                    large_arc: g[3] != 0.0,
                    sweep: g[4] != 0.0,
                    to: pt(g[5], g[6]),
                };
                self.emit(PathCommand::ArcTo(arc), None, None)
            }
            'Z' => {
                self.out.push(PathCommand::Close);
                self.current = Some(self.subpath_start);
                self.after_close = true;
                self.last_cubic_ctrl = None;
                self.last_quad_ctrl = None;
            }
            other => return Err(LowerError::UnknownLetter(other)),
        }
        Ok(())
    }
}

/// Converts raw path data to absolute commands of the restricted alphabet.
pub fn lower_commands(raw: &[RawCommand]) -> Result<Vec<PathCommand>, LowerError> {
    match raw.first() {
        Some(first) if first.letter.eq_ignore_ascii_case(&'m') => {}
        Some(_) => return Err(LowerError::StartsWithoutMove),
        None => return Ok(Vec::new()),
    }
    let mut state = Lowering::default();
    for cmd in raw {
        for (index, group) in cmd.groups().enumerate() {
            state.group(cmd.letter, index, group)?;
        }
    }
    Ok(state.out)
}

fn map_path(path: &SvgPath, point: impl Fn(Point) -> Point, length: impl Fn(f64) -> f64 + Copy, angle: impl Fn(f64) -> f64 + Copy, stroke: impl Fn(f64) -> f64) -> SvgPath {
    let commands = path
        .commands()
        .iter()
        .map(|c| c.transform(&point, length, angle))
        .collect();
    let mut style = *path.style();
    if style.stroke.is_some() {
        style.stroke_width = stroke(style.stroke_width);
    }
    SvgPath::from_parts(commands, style)
}

/// Uniformly scales the document into a `target`-sided square viewbox, centering
/// the shorter axis.
pub fn rescale_viewbox(doc: &SvgDocument, target: f64) -> SvgDocument {
    let vb = doc.view_box();
    let scale = target / vb.width.max(vb.height);
    let tx = (target - vb.width * scale) / 2.0 - vb.min_x * scale;
    let ty = (target - vb.height * scale) / 2.0 - vb.min_y * scale;
    let paths = doc
        .paths()
        .iter()
        .map(|p| {
            map_path(
                p,
                |pt| Point::new(pt.x * scale + tx, pt.y * scale + ty),
                |len| len * scale,
                |a| a,
                |w| w * scale,
            )
        })
        .collect();
    SvgDocument::from_parts(ViewBox::square(target), paths)
}

fn round_half_away(v: f64) -> f64 {
    // f64::round rounds ties away from zero.
    v.round()
}

fn quantize_radius(r: f64) -> f64 {
    let q = round_half_away(r);
    if r >= 0.5 {
        q.max(1.0)
    } else {
        q
    }
}

/// Whether a command draws nothing, measured from `start`.
fn zero_length(start: Point, cmd: &PathCommand, subpath_start: Point) -> bool {
    match *cmd {
        PathCommand::MoveTo(_) => false,
        PathCommand::LineTo(p) => p == start,
        PathCommand::CubicTo { ctrl1, ctrl2, to } => ctrl1 == start && ctrl2 == start && to == start,
        PathCommand::QuadTo { ctrl, to } => ctrl == start && to == start,
        PathCommand::ArcTo(a) => a.to == start,
        PathCommand::Close => start == subpath_start,
    }
}

/// Points visited by each subpath, controls included.
fn subpath_points(commands: &[PathCommand]) -> Vec<(Vec<Point>, bool)> {
    let mut out: Vec<(Vec<Point>, bool)> = Vec::new();
    for cmd in commands {
        match cmd {
            PathCommand::MoveTo(p) => out.push((vec![*p], false)),
            PathCommand::Close => {
                if let Some(last) = out.last_mut() {
                    last.1 = true;
                }
            }
            other => {
                if let Some(last) = out.last_mut() {
                    last.0.extend(other.points());
                }
            }
        }
    }
    out
}

fn all_coincide(points: &[Point]) -> bool {
    points.windows(2).all(|w| w[0] == w[1])
}

/// True when rounding collapsed a command or a closed subpath that was not collapsed before.
fn became_degenerate(before: &[PathCommand], after: &[PathCommand]) -> bool {
    let mut cur_b = Point::ORIGIN;
    let mut cur_a = Point::ORIGIN;
    let mut start_b = Point::ORIGIN;
    let mut start_a = Point::ORIGIN;
    for (b, a) in before.iter().zip(after) {
        if zero_length(cur_a, a, start_a) && !zero_length(cur_b, b, start_b) {
            return true;
        }
        match (b.end_point(), a.end_point()) {
            (Some(pb), Some(pa)) => {
                cur_b = pb;
                cur_a = pa;
            }
            _ => {
                cur_b = start_b;
                cur_a = start_a;
            }
        }
        if let (PathCommand::MoveTo(pb), PathCommand::MoveTo(pa)) = (b, a) {
            start_b = *pb;
            start_a = *pa;
        }
    }
    subpath_points(before)
        .iter()
        .zip(subpath_points(after))
        .any(|((pb, closed), (pa, _))| *closed && all_coincide(&pa) && !all_coincide(pb))
}

/// Largest displacement integer rounding may cause along an arc before the
/// path is kept at two decimals.
pub const MAX_ARC_DRIFT: f64 = 1.0;

fn arc_point(from: Point, arc: &ArcSegment, t: f64) -> Point {
    match endpoint_to_center(from, arc) {
        ArcShape::Omitted => from,
        ArcShape::Line => from.lerp(arc.to, t),
        ArcShape::Elliptic(c) => c.point_at(c.start_angle + t * c.sweep_angle),
    }
}

/// Largest distance between corresponding points of the arcs of two paths
/// with the same command structure. Arc geometry depends on its endpoints
/// nonlinearly, so sub-unit endpoint moves can swing a narrow arc far.
fn arc_drift(before: &[PathCommand], after: &[PathCommand]) -> f64 {
    let mut worst: f64 = 0.0;
    let (mut cur_b, mut cur_a) = (Point::ORIGIN, Point::ORIGIN);
    let (mut start_b, mut start_a) = (Point::ORIGIN, Point::ORIGIN);
    for (b, a) in before.iter().zip(after) {
        if let (PathCommand::ArcTo(ab), PathCommand::ArcTo(aa)) = (b, a) {
            for k in 0..=32 {
                let t = k as f64 / 32.0;
                worst = worst.max(arc_point(cur_b, ab, t).distance(arc_point(cur_a, aa, t)));
            }
        }
        if let (PathCommand::MoveTo(pb), PathCommand::MoveTo(pa)) = (b, a) {
            start_b = *pb;
            start_a = *pa;
        }
        match (b.end_point(), a.end_point()) {
            (Some(pb), Some(pa)) => {
                cur_b = pb;
                cur_a = pa;
            }
            _ => {
                cur_b = start_b;
                cur_a = start_a;
            }
        }
    }
    worst
}

/// Rounds coordinates to integers, keeping a path at two decimals when rounding
/// would collapse part of it or move an arc by more than [`MAX_ARC_DRIFT`].
///
/// Values are first brought to two decimals, so quantizing an already
/// quantized document is the identity.
pub fn quantize_coords(doc: &SvgDocument) -> SvgDocument {
    let paths = doc
        .paths()
        .iter()
        .map(|path| {
            let hundredths = map_path(
                path,
                |p| p.map(round_to_hundredths),
                round_to_hundredths,
                round_to_hundredths,
                round_to_hundredths,
            );
            let integral = map_path(
                &hundredths,
                |p| p.map(round_half_away),
                quantize_radius,
                |a| a,
                |w| w,
            );
            if became_degenerate(hundredths.commands(), integral.commands())
                || arc_drift(hundredths.commands(), integral.commands()) > MAX_ARC_DRIFT
            {
                hundredths
            } else {
                integral
            }
        })
        .collect();
    SvgDocument::from_parts(doc.view_box(), paths)
}

/// Canonical form of an already lowered document: rescale to 200×200, then quantize.
pub fn normalize(doc: &SvgDocument) -> SvgDocument {
    quantize_coords(&rescale_viewbox(doc, CANONICAL_SIDE))
}

/// Lowers and normalizes a parsed document.
pub fn normalize_raw(parsed: &ParsedSvg) -> Result<SvgDocument, SvgError> {
    Ok(normalize(&parsed.lower()?))
}
