//! Conversion of the basic SVG shapes into path commands.

use thiserror::Error;

use super::path_data::RawCommand;
use super::ParseMode;
use crate::geom::Point;

#[derive(Clone, Debug, PartialEq)]
pub enum BasicShape {
    Rect {
        x: f64,
        y: f64,
        width: f64,
        height: f64,
        rx: f64,
        ry: f64,
    },
    Circle {
        cx: f64,
        cy: f64,
        r: f64,
    },
    Ellipse {
        cx: f64,
        cy: f64,
        rx: f64,
        ry: f64,
    },
    Line {
        x1: f64,
        y1: f64,
        x2: f64,
        y2: f64,
    },
    Polygon(Vec<Point>),
    Polyline(Vec<Point>),
}

#[derive(Clone, Debug, Error, PartialEq)]
pub enum ShapeError {
    #[error("negative dimension on <{shape}>")]
    NegativeDimension { shape: &'static str },
    #[error("rounded rectangles are not supported in strict mode")]
    RoundedRectUnsupported,
    #[error("non-finite shape parameter on <{shape}>")]
    NonFinite { shape: &'static str },
}

impl BasicShape {
    pub fn element_name(&self) -> &'static str {
        match self {
            BasicShape::Rect { .. } => "rect",
            BasicShape::Circle { .. } => "circle",
            BasicShape::Ellipse { .. } => "ellipse",
            BasicShape::Line { .. } => "line",
            BasicShape::Polygon(_) => "polygon",
            BasicShape::Polyline(_) => "polyline",
        }
    }

    fn scalars(&self) -> Vec<f64> {
        match self {
            BasicShape::Rect { x, y, width, height, rx, ry } => vec![*x, *y, *width, *height, *rx, *ry],
            BasicShape::Circle { cx, cy, r } => vec![*cx, *cy, *r],
            BasicShape::Ellipse { cx, cy, rx, ry } => vec![*cx, *cy, *rx, *ry],
            BasicShape::Line { x1, y1, x2, y2 } => vec![*x1, *y1, *x2, *y2],
            BasicShape::Polygon(pts) | BasicShape::Polyline(pts) => {
                pts.iter().flat_map(|p| [p.x, p.y]).collect()
            }
        }
    }
}

fn m(x: f64, y: f64) -> RawCommand {
    RawCommand::new('M', vec![x, y])
}

fn l(x: f64, y: f64) -> RawCommand {
    RawCommand::new('L', vec![x, y])
}

fn a(rx: f64, ry: f64, x: f64, y: f64) -> RawCommand {
    RawCommand::new('A', vec![rx, ry, 0.0, 0.0, 1.0, x, y])
}

fn z() -> RawCommand {
    RawCommand::new('Z', vec![])
}

fn ellipse_arcs(cx: f64, cy: f64, rx: f64, ry: f64) -> Vec<RawCommand> {
    vec![
        m(cx + rx, cy),
        a(rx, ry, cx, cy + ry),
        a(rx, ry, cx - rx, cy),
        a(rx, ry, cx, cy - ry),
        a(rx, ry, cx + rx, cy),
        z(),
    ]
}

/// Converts a basic shape to path commands.
///
/// Zero-sized rects, circles and ellipses yield an empty list (they do not render).
/// Rounded rect corners are an error in strict mode and become quarter arcs otherwise.
pub fn shape_to_path(shape: &BasicShape, mode: ParseMode) -> Result<Vec<RawCommand>, ShapeError> {
    let name = shape.element_name();
    if shape.scalars().iter().any(|v| !v.is_finite()) {
        return Err(ShapeError::NonFinite { shape: name });
    }
    let negative = ShapeError::NegativeDimension { shape: name };
    let cmds = match *shape {
        BasicShape::Rect { x, y, width, height, rx, ry } => {
            if width < 0.0 || height < 0.0 || rx < 0.0 || ry < 0.0 {
                return Err(negative);
            }
            if width == 0.0 || height == 0.0 {
                return Ok(vec![]);
            }
            if rx > 0.0 || ry > 0.0 {
                if mode == ParseMode::Strict {
                    return Err(ShapeError::RoundedRectUnsupported);
                }
                rounded_rect(x, y, width, height, rx, ry)
            } else {
                vec![m(x, y), l(x + width, y), l(x + width, y + height), l(x, y + height), z()]
            }
        }
        BasicShape::Circle { cx, cy, r } => {
            if r < 0.0 {
                return Err(negative);
            }
            if r == 0.0 {
                return Ok(vec![]);
            }
            ellipse_arcs(cx, cy, r, r)
        }
        BasicShape::Ellipse { cx, cy, rx, ry } => {
            if rx < 0.0 || ry < 0.0 {
                return Err(negative);
            }
            if rx == 0.0 || ry == 0.0 {
                return Ok(vec![]);
            }
            ellipse_arcs(cx, cy, rx, ry)
        }
        BasicShape::Line { x1, y1, x2, y2 } => vec![m(x1, y1), l(x2, y2)],
        BasicShape::Polygon(ref pts) | BasicShape::Polyline(ref pts) => {
            let Some((first, rest)) = pts.split_first() else {
                return Ok(vec![]);
            };
            let mut cmds = vec![m(first.x, first.y)];
            cmds.extend(rest.iter().map(|p| l(p.x, p.y)));
            if matches!(shape, BasicShape::Polygon(_)) {
                cmds.push(z());
            }
            cmds
        }
    };
    Ok(cmds)
}

fn rounded_rect(x: f64, y: f64, w: f64, h: f64, rx: f64, ry: f64) -> Vec<RawCommand> {
    // A missing radius takes the value of the other one.
    let (rx, ry) = match (rx > 0.0, ry > 0.0) {
        (true, false) => (rx, rx),
        (false, true) => (ry, ry),
        _ => (rx, ry),
    };
    let rx = rx.min(w / 2.0);
    let ry = ry.min(h / 2.0);
    vec![
        m(x + rx, y),
        l(x + w - rx, y),
        a(rx, ry, x + w, y + ry),
        l(x + w, y + h - ry),
        a(rx, ry, x + w - rx, y + h),
        l(x + rx, y + h),
        a(rx, ry, x, y + h - ry),
        l(x, y + ry),
        a(rx, ry, x + rx, y),
        z(),
    ]
}
