use crate::geom::Point;
use crate::svg::{PathCommand, Rgba, SvgDocument, ViewBox};

use super::fill::{coverage_mask, stroke_polygons};
use super::flatten::flatten_path;
use super::image::RasterImage;

pub const DEFAULT_RESOLUTION: u32 = 224;
pub const MIN_RESOLUTION: u32 = 16;

/// Flattening tolerance in device pixels.
const PIXEL_TOLERANCE: f64 = 0.1;

/// Uniform scale plus centering offset from user space to a square canvas.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DeviceTransform {
    pub scale: f64,
    pub offset: Point,
}

impl DeviceTransform {
    pub fn fit(view_box: ViewBox, side: u32) -> Self {
        let side = side as f64;
        let scale = side / view_box.width.max(view_box.height);
        DeviceTransform {
            scale,
            offset: Point::new(
                (side - view_box.width * scale) / 2.0 - view_box.min_x * scale,
                (side - view_box.height * scale) / 2.0 - view_box.min_y * scale,
            ),
        }
    }

    pub fn apply(&self, p: Point) -> Point {
        Point::new(p.x * self.scale + self.offset.x, p.y * self.scale + self.offset.y)
    }

    pub fn apply_command(&self, cmd: &PathCommand) -> PathCommand {
        cmd.transform(|p| self.apply(p), |r| r * self.scale, |a| a)
    }
}

/// Renders onto an opaque white `resolution`² canvas.
///
/// Panics if `resolution` is below [`MIN_RESOLUTION`].
pub fn render(doc: &SvgDocument, resolution: u32) -> RasterImage {
    assert!(resolution >= MIN_RESOLUTION, "render resolution {resolution} is below {MIN_RESOLUTION}");
    let side = resolution as usize;
    let xf = DeviceTransform::fit(doc.view_box(), resolution);
    let mut canvas = vec![255.0f64; side * side * 3];

    for path in doc.paths() {
        let commands: Vec<PathCommand> = path.commands().iter().map(|c| xf.apply_command(c)).collect();
        let lines = flatten_path(&commands, PIXEL_TOLERANCE);
        let style = path.style();
        if let Some(color) = style.fill {
            let polys: Vec<Vec<Point>> = lines.iter().map(|l| l.points.clone()).collect();
            let mask = coverage_mask(&polys, style.fill_rule, side, side);
            composite(&mut canvas, &mask, color);
        }
        if let Some(color) = style.stroke {
            let width = style.stroke_width * xf.scale;
            let polys: Vec<Vec<Point>> = lines.iter().flat_map(|l| stroke_polygons(l, width)).collect();
            let mask = coverage_mask(&polys, crate::svg::FillRule::NonZero, side, side);
            composite(&mut canvas, &mask, color);
        }
    }

    let pixels = canvas.iter().map(|v| v.round().clamp(0.0, 255.0) as u8).collect();
    RasterImage::new(resolution, resolution, pixels).expect("canvas dimensions are consistent")
}

fn composite(canvas: &mut [f64], mask: &[f32], color: Rgba) {
    let src = [color.r as f64, color.g as f64, color.b as f64];
    for (px, &cov) in canvas.chunks_exact_mut(3).zip(mask) {
        if cov <= 0.0 {
            continue;
        }
        let a = color.a * cov as f64;
        for c in 0..3 {
            px[c] = px[c] * (1.0 - a) + src[c] * a;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::svg::{parse_svg, ParseMode};

    fn doc(body: &str) -> SvgDocument {
        let text = format!(r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 200 200">{body}</svg>"#);
        parse_svg(&text, ParseMode::Strict).unwrap()
    }

    #[test]
    fn full_square_is_black() {
        let img = render(&doc(r##"<path d="M0 0 L200 0 L200 200 L0 200 Z" fill="#000000"/>"##), 200);
        assert!(img.pixel_iter().all(|p| p == [0, 0, 0]));
    }

    #[test]
    fn empty_document_is_white() {
        let img = render(&doc(""), 224);
        assert!(img.is_all_white());
        assert_eq!(img.width(), 224);
    }

    #[test]
    fn right_triangle_half_black() {
        let img = render(&doc(r##"<path d="M0 0 L200 0 L0 200 Z" fill="#000000"/>"##), 224);
        let black = img.pixel_iter().filter(|p| p[0] < 128).count();
        let frac = black as f64 / (224.0 * 224.0);
        assert!((frac - 0.5).abs() <= 0.01, "{frac}");
    }

    #[test]
    fn later_paths_paint_over_earlier() {
        let img = render(
            &doc(r##"<path d="M0 0 L200 0 L200 200 L0 200 Z" fill="#ff0000"/><path d="M0 0 L100 0 L100 200 L0 200 Z" fill="#0000ff"/>"##),
            16,
        );
        assert_eq!(img.pixel(2, 8), [0, 0, 255]);
        assert_eq!(img.pixel(12, 8), [255, 0, 0]);
    }

    #[test]
    fn fill_opacity_blends_with_white() {
        let img = render(&doc(r##"<path d="M0 0 L200 0 L200 200 L0 200 Z" fill="#000000" fill-opacity="0.5"/>"##), 16);
        assert_eq!(img.pixel(5, 5), [128, 128, 128]);
    }

    #[test]
    fn stroke_only_path() {
        let img = render(&doc(r##"<path d="M0 100 L200 100" fill="none" stroke="#000000" stroke-width="25"/>"##), 16);
        assert_eq!(img.pixel(8, 7), [0, 0, 0]);
        assert_eq!(img.pixel(8, 0), [255, 255, 255]);
    }

    #[test]
    fn non_square_viewbox_letterboxed() {
        let text = r##"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 20 10"><path d="M0 0 L20 0 L20 10 L0 10 Z"/></svg>"##;
        let img = render(&parse_svg(text, ParseMode::Strict).unwrap(), 20);
        assert_eq!(img.pixel(10, 1), [255, 255, 255]);
        assert_eq!(img.pixel(10, 10), [0, 0, 0]);
    }

    #[test]
    #[should_panic]
    fn tiny_resolution_rejected() {
        render(&doc(""), 8);
    }
}
