//! Canonical text form.
//!
//! Numbers are written as integers when they round to one at two decimals,
//! otherwise with exactly two decimals. Opacity is written in shortest
//! round-trip form so styles survive a parse exactly.

use std::fmt::Write as _;

use super::document::{FillRule, PathCommand, Rgba, SvgDocument, SvgPath};

pub const SVG_NAMESPACE: &str = "http://www.w3.org/2000/svg";

pub fn format_number(value: f64) -> String {
    let rounded = (value * 100.0).round() / 100.0;
    if rounded == 0.0 {
        return "0".to_string();
    }
    if rounded.fract() == 0.0 {
        format!("{rounded:.0}")
    } else {
        format!("{rounded:.2}")
    }
}

/// Rounds to the precision [`format_number`] writes.
pub fn round_to_hundredths(value: f64) -> f64 {
    (value * 100.0).round() / 100.0
}

fn flag(b: bool) -> &'static str {
    if b {
        "1"
    } else {
        "0"
    }
}

/// The `d` attribute value for a command list, single-space separated.
pub fn path_data_string(commands: &[PathCommand]) -> String {
    let mut out = String::new();
    for cmd in commands {
        if !out.is_empty() {
            out.push(' ');
        }
        out.push(cmd.letter());
        let mut push = |v: f64| {
            out.push(' ');
            out.push_str(&format_number(v));
        };
        match *cmd {
            PathCommand::MoveTo(p) | PathCommand::LineTo(p) => {
                push(p.x);
                push(p.y);
            }
            PathCommand::CubicTo { ctrl1, ctrl2, to } => {
                for p in [ctrl1, ctrl2, to] {
                    push(p.x);
                    push(p.y);
                }
            }
            PathCommand::QuadTo { ctrl, to } => {
                for p in [ctrl, to] {
                    push(p.x);
                    push(p.y);
                }
            }
            PathCommand::ArcTo(arc) => {
                push(arc.rx);
                push(arc.ry);
                push(arc.x_rotation);
                out.push(' ');
                out.push_str(flag(arc.large_arc));
                out.push(' ');
                out.push_str(flag(arc.sweep));
                out.push(' ');
                out.push_str(&format_number(arc.to.x));
                out.push(' ');
                out.push_str(&format_number(arc.to.y));
            }
            PathCommand::Close => {}
        }
    }
    out
}

fn paint(out: &mut String, name: &str, color: Option<Rgba>) {
    match color {
        None => {
            let _ = write!(out, " {name}=\"none\"");
        }
        Some(c) => {
            let _ = write!(out, " {name}=\"{}\"", c.hex());
            if c.a != 1.0 {
                let _ = write!(out, " {name}-opacity=\"{}\"", c.a);
            }
        }
    }
}

/// One `<path .../>` element in canonical form.
pub fn serialize_path(path: &SvgPath) -> String {
    let style = path.style();
    let mut out = format!("<path d=\"{}\"", path_data_string(path.commands()));
    paint(&mut out, "fill", style.fill);
    if style.fill_rule == FillRule::EvenOdd {
        out.push_str(" fill-rule=\"evenodd\"");
    }
    if let Some(stroke) = style.stroke {
        paint(&mut out, "stroke", Some(stroke));
        let _ = write!(out, " stroke-width=\"{}\"", format_number(style.stroke_width));
    }
    out.push_str("/>");
    out
}

pub fn serialize_svg(doc: &SvgDocument) -> String {
    let vb = doc.view_box();
    let mut out = format!(
        "<svg xmlns=\"{SVG_NAMESPACE}\" viewBox=\"{} {} {} {}\">\n",
        format_number(vb.min_x),
        format_number(vb.min_y),
        format_number(vb.width),
        format_number(vb.height)
    );
    for path in doc.paths() {
        out.push_str(&serialize_path(path));
        out.push('\n');
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Point;
    use crate::svg::{PathStyle, ViewBox};

    #[test]
    fn number_format_rules() {
        assert_eq!(format_number(12.5), "12.50");
        assert_eq!(format_number(15.0), "15");
        assert_eq!(format_number(-0.0), "0");
        assert_eq!(format_number(99.999), "100");
        assert_eq!(format_number(-3.25), "-3.25");
        assert_eq!(format_number(0.004), "0");
    }

    #[test]
    fn path_data_single_spaced() {
        let cmds = [
            PathCommand::MoveTo(Point::new(0.0, 0.0)),
            PathCommand::LineTo(Point::new(15.0, 10.0)),
        ];
        assert_eq!(path_data_string(&cmds), "M 0 0 L 15 10");
    }

    #[test]
    fn document_contains_d_attribute() {
        let path = SvgPath::new(
            vec![
                PathCommand::MoveTo(Point::new(0.0, 0.0)),
                PathCommand::LineTo(Point::new(15.0, 10.0)),
            ],
            PathStyle::default(),
        )
        .unwrap();
        let doc = SvgDocument::new(ViewBox::square(200.0), vec![path]).unwrap();
        let text = serialize_svg(&doc);
        assert!(text.contains("d=\"M 0 0 L 15 10\""));
        assert!(text.contains("viewBox=\"0 0 200 200\""));
        assert_eq!(text, serialize_svg(&doc.clone()));
    }
}
