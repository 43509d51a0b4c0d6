//! Document parser for the supported dialect: an `<svg>` root with a viewBox,
//! `<path>` elements and the six basic shapes, painted with solid colors.

use std::collections::HashMap;

use roxmltree::{Document, Node};
use thiserror::Error;

use super::color::{parse_color, parse_paint, Paint};
use super::document::{DocumentError, FillRule, PathStyle, Rgba, SvgDocument, SvgPath, ViewBox};
use super::path_data::{parse_path_data, PathDataError, RawCommand};
use super::shapes::{shape_to_path, BasicShape, ShapeError};
use super::ParseMode;
use crate::geom::Point;
use crate::normalize::{lower_commands, LowerError};

#[derive(Clone, Debug, Error, PartialEq)]
pub enum SvgError {
    #[error("malformed markup at byte {offset}: {message}")]
    MalformedMarkup { offset: usize, message: String },
    #[error("root element is <{found}>, expected <svg>")]
    NotSvgRoot { found: String },
    #[error("missing viewBox on <svg>")]
    MissingViewBox,
    #[error("invalid viewBox \"{value}\"")]
    InvalidViewBox { value: String },
    #[error("unsupported construct: {construct}")]
    UnsupportedConstruct { construct: String },
    #[error("gradient paint \"{id}\" is unsupported")]
    GradientUnsupported { id: String },
    #[error("invalid value \"{value}\" for attribute {name}")]
    InvalidAttribute { name: String, value: String },
    #[error("path data of element {element}: {source} (document byte {offset})")]
    PathData {
        element: usize,
        offset: usize,
        source: PathDataError,
    },
    #[error(transparent)]
    Shape(#[from] ShapeError),
    #[error("path {element}: {source}")]
    Lower { element: usize, source: LowerError },
    #[error("path {element}: {source}")]
    Document { element: usize, source: DocumentError },
}

impl SvgError {
    /// Stable diagnostic code used in validity reports and CLI messages.
    pub fn code(&self) -> &'static str {
        match self {
            SvgError::MalformedMarkup { .. } | SvgError::NotSvgRoot { .. } => "MalformedMarkup",
            SvgError::MissingViewBox => "MissingViewBox",
            SvgError::InvalidViewBox { .. } => "InvalidViewBox",
            SvgError::UnsupportedConstruct { .. } => "UnsupportedConstruct",
            SvgError::GradientUnsupported { .. } => "GradientUnsupported",
            SvgError::InvalidAttribute { .. } => "InvalidAttribute",
            SvgError::PathData { source, .. } => match source {
                PathDataError::MissingCoordinate { .. } => "MissingCoordinate",
                PathDataError::UnknownLetter { .. } => "UnknownLetter",
                PathDataError::NonFiniteNumber { .. } => "NonFiniteNumber",
                PathDataError::BadArcFlag { .. } => "BadArcFlag",
                PathDataError::ExpectedCommand { .. } => "ExpectedCommand",
            },
            SvgError::Shape(ShapeError::RoundedRectUnsupported) => "RoundedRectUnsupported",
            SvgError::Shape(ShapeError::NegativeDimension { .. }) => "NegativeDimension",
            SvgError::Shape(ShapeError::NonFinite { .. }) => "NonFiniteNumber",
            SvgError::Lower { .. } => "StartsWithoutMove",
            SvgError::Document { .. } => "InvalidPath",
        }
    }
}

/// A path as written in the source, before lowering.
#[derive(Clone, Debug, PartialEq)]
pub struct RawPath {
    pub commands: Vec<RawCommand>,
    pub style: PathStyle,
}

/// Result of parsing with raw path data retained.
#[derive(Clone, Debug, PartialEq)]
pub struct ParsedSvg {
    pub view_box: ViewBox,
    pub paths: Vec<RawPath>,
    /// Constructs skipped or substituted in lenient mode.
    pub warnings: Vec<String>,
}

impl ParsedSvg {
    /// Lowers every path to the absolute `{M, L, C, Q, A, Z}` alphabet.
    pub fn lower(&self) -> Result<SvgDocument, SvgError> {
        let mut paths = Vec::with_capacity(self.paths.len());
        for (element, raw) in self.paths.iter().enumerate() {
            let commands =
                lower_commands(&raw.commands).map_err(|source| SvgError::Lower { element, source })?;
            let path = SvgPath::new(commands, raw.style)
                .map_err(|source| SvgError::Document { element, source })?;
            paths.push(path);
        }
        SvgDocument::new(self.view_box, paths).map_err(|_| SvgError::InvalidViewBox {
            value: format!("{:?}", self.view_box),
        })
    }
}

/// Parses and lowers a document.
pub fn parse_svg(text: &str, mode: ParseMode) -> Result<SvgDocument, SvgError> {
    parse_svg_raw(text, mode)?.lower()
}

/// Parses a document keeping each path's commands as written.
pub fn parse_svg_raw(text: &str, mode: ParseMode) -> Result<ParsedSvg, SvgError> {
    let doc = Document::parse(text).map_err(|e| SvgError::MalformedMarkup {
        offset: text_pos_to_offset(text, e.pos()),
        message: e.to_string(),
    })?;
    let root = doc.root_element();
    if root.tag_name().name() != "svg" {
        return Err(SvgError::NotSvgRoot {
            found: root.tag_name().name().to_string(),
        });
    }
    let mut parser = Parser {
        mode,
        warnings: Vec::new(),
        gradients: collect_gradients(&doc),
        paths: Vec::new(),
    };
    let view_box = parser.view_box(root)?;
    let root_style = parser.style_attrs(root, StyleSpec::default(), ROOT_ATTRS)?;
    parser.children(root, &root_style)?;
    Ok(ParsedSvg {
        view_box,
        paths: parser.paths,
        warnings: parser.warnings,
    })
}

fn text_pos_to_offset(text: &str, pos: roxmltree::TextPos) -> usize {
    let mut offset = 0;
    for (i, line) in text.split_inclusive('\n').enumerate() {
        if i + 1 == pos.row as usize {
            let col: usize = line
                .chars()
                .take(pos.col.saturating_sub(1) as usize)
                .map(char::len_utf8)
                .sum();
            return offset + col;
        }
        offset += line.len();
    }
    text.len()
}

const PRESENTATION_ATTRS: &[&str] = &[
    "fill",
    "fill-opacity",
    "fill-rule",
    "stroke",
    "stroke-width",
    "stroke-opacity",
    "opacity",
];
const ROOT_ATTRS: &[&str] = &["viewBox", "width", "height", "version", "id", "baseProfile"];

fn is_gradient(node: &Node) -> bool {
    matches!(node.tag_name().name(), "linearGradient" | "radialGradient")
}

/// First stop color (with its opacity) of every gradient in the document, keyed by id.
fn collect_gradients(doc: &Document) -> HashMap<String, Option<Rgba>> {
    let mut out = HashMap::new();
    for node in doc.descendants().filter(is_gradient) {
        let Some(id) = node.attribute("id") else { continue };
        let first_stop = node
            .children()
            .find(|c| c.is_element() && c.tag_name().name() == "stop")
            .and_then(|stop| {
                let declared = style_declarations(stop.attribute("style").unwrap_or(""));
                let lookup = |name: &str| {
                    stop.attribute(name).map(str::to_string).or_else(|| {
                        declared.iter().find(|(k, _)| k == name).map(|(_, v)| v.clone())
                    })
                };
                let color = parse_color(&lookup("stop-color").unwrap_or_else(|| "black".into()))?;
                let opacity = lookup("stop-opacity")
                    .and_then(|v| v.trim().parse::<f64>().ok())
                    .unwrap_or(1.0);
                Some(color.with_alpha(opacity))
            });
        out.insert(id.to_string(), first_stop);
    }
    out
}

fn style_declarations(style: &str) -> Vec<(String, String)> {
    style
        .split(';')
        .filter_map(|decl| {
            let (k, v) = decl.split_once(':')?;
            Some((k.trim().to_string(), v.trim().to_string()))
        })
        .collect()
}

/// Inheritable presentation state.
#[derive(Clone, Debug)]
struct StyleSpec {
    fill: Option<Option<Rgba>>,
    fill_opacity: Option<f64>,
    fill_rule: Option<FillRule>,
    stroke: Option<Option<Rgba>>,
    stroke_opacity: Option<f64>,
    stroke_width: Option<f64>,
    opacity: f64,
}

impl Default for StyleSpec {
    fn default() -> Self {
        StyleSpec {
            fill: None,
            fill_opacity: None,
            fill_rule: None,
            stroke: None,
            stroke_opacity: None,
            stroke_width: None,
            opacity: 1.0,
        }
    }
}

impl StyleSpec {
    fn resolve(&self) -> PathStyle {
        let group_opacity = self.opacity;
        let fill = self
            .fill
            .unwrap_or(Some(Rgba::BLACK))
            .map(|c| c.with_alpha(c.a * self.fill_opacity.unwrap_or(1.0) * group_opacity));
        let mut stroke = self
            .stroke
            .flatten()
            .map(|c| c.with_alpha(c.a * self.stroke_opacity.unwrap_or(1.0) * group_opacity));
        let stroke_width = self.stroke_width.unwrap_or(1.0);
        if stroke_width <= 0.0 {
            stroke = None;
        }
        PathStyle {
            fill,
            fill_rule: self.fill_rule.unwrap_or_default(),
            // width is meaningless without a stroke; keep the default so documents compare equal
            stroke_width: if stroke.is_some() { stroke_width } else { 1.0 },
            stroke,
        }
    }
}

struct Parser {
    mode: ParseMode,
    warnings: Vec<String>,
    gradients: HashMap<String, Option<Rgba>>,
    paths: Vec<RawPath>,
}

impl Parser {
    fn strict(&self) -> bool {
        self.mode == ParseMode::Strict
    }

    /// Rejects in strict mode, records a warning otherwise.
    fn unsupported(&mut self, construct: String) -> Result<(), SvgError> {
        if self.strict() {
            return Err(SvgError::UnsupportedConstruct { construct });
        }
        self.warnings.push(format!("skipped {construct}"));
        Ok(())
    }

    fn number(&self, name: &str, value: &str) -> Result<f64, SvgError> {
        let trimmed = value.trim();
        let body = if self.strict() {
            trimmed
        } else {
            trimmed.strip_suffix("px").unwrap_or(trimmed)
        };
        body.parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| SvgError::InvalidAttribute {
                name: name.to_string(),
                value: value.to_string(),
            })
    }

    fn view_box(&mut self, root: Node) -> Result<ViewBox, SvgError> {
        if let Some(value) = root.attribute("viewBox") {
            let nums: Vec<f64> = value
                .split(|c: char| c.is_whitespace() || c == ',')
                .filter(|s| !s.is_empty())
                .map(|s| s.parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|_| SvgError::InvalidViewBox { value: value.into() })?;
            let vb = match nums.as_slice() {
                [x, y, w, h] => ViewBox::new(*x, *y, *w, *h),
                _ => return Err(SvgError::InvalidViewBox { value: value.into() }),
            };
            if !vb.is_valid() {
                return Err(SvgError::InvalidViewBox { value: value.into() });
            }
            return Ok(vb);
        }
        if !self.strict() {
            if let (Some(w), Some(h)) = (root.attribute("width"), root.attribute("height")) {
                if let (Ok(w), Ok(h)) = (self.number("width", w), self.number("height", h)) {
                    let vb = ViewBox::new(0.0, 0.0, w, h);
                    if vb.is_valid() {
                        self.warnings.push("viewBox derived from width/height".into());
                        return Ok(vb);
                    }
                }
            }
        }
        Err(SvgError::MissingViewBox)
    }

    fn paint(&mut self, name: &str, value: &str) -> Result<Option<Rgba>, SvgError> {
        match parse_paint(value) {
            Some(Paint::None) => Ok(None),
            Some(Paint::Color(c)) => Ok(Some(c)),
            Some(Paint::Reference(id)) => {
                if self.strict() {
                    return Err(SvgError::GradientUnsupported { id });
                }
                match self.gradients.get(&id) {
                    Some(stop) => {
                        self.warnings.push(format!("gradient {id} replaced by its first stop color"));
                        Ok(*stop)
                    }
                    None => {
                        self.warnings.push(format!("unresolved paint reference {id}"));
                        Ok(None)
                    }
                }
            }
            None if self.strict() => Err(SvgError::InvalidAttribute {
                name: name.to_string(),
                value: value.to_string(),
            }),
            None => {
                self.warnings.push(format!("unrecognized {name} value \"{value}\" ignored"));
                Ok(Some(Rgba::BLACK))
            }
        }
    }

    fn apply_presentation(&mut self, spec: &mut StyleSpec, name: &str, value: &str) -> Result<(), SvgError> {
        match name {
            "fill" => spec.fill = Some(self.paint(name, value)?),
            "stroke" => spec.stroke = Some(self.paint(name, value)?),
            "fill-opacity" => spec.fill_opacity = Some(self.number(name, value)?.clamp(0.0, 1.0)),
            "stroke-opacity" => spec.stroke_opacity = Some(self.number(name, value)?.clamp(0.0, 1.0)),
            "opacity" => spec.opacity *= self.number(name, value)?.clamp(0.0, 1.0),
            "stroke-width" => {
                let w = self.number(name, value)?;
                if w < 0.0 {
                    return Err(SvgError::InvalidAttribute {
                        name: name.into(),
                        value: value.into(),
                    });
                }
                spec.stroke_width = Some(w);
            }
            "fill-rule" => {
                spec.fill_rule = Some(match value.trim() {
                    "nonzero" => FillRule::NonZero,
                    "evenodd" => FillRule::EvenOdd,
                    _ => {
                        return Err(SvgError::InvalidAttribute {
                            name: name.into(),
                            value: value.into(),
                        })
                    }
                })
            }
            _ => unreachable!("not a presentation attribute: {name}"),
        }
        Ok(())
    }

    /// Applies presentation attributes of `node` over `inherited`, rejecting or
    /// warning about anything not in `PRESENTATION_ATTRS` or `geometry`.
    fn style_attrs(&mut self, node: Node, inherited: StyleSpec, geometry: &[&str]) -> Result<StyleSpec, SvgError> {
        let mut spec = inherited;
        let element = node.tag_name().name().to_string();
        let mut css = None;
        for attr in node.attributes() {
            let name = attr.name();
            let foreign = attr.namespace().is_some_and(|ns| ns != super::write::SVG_NAMESPACE);
            if foreign {
                self.unsupported(format!("attribute {name} on <{element}>"))?;
            } else if PRESENTATION_ATTRS.contains(&name) {
                self.apply_presentation(&mut spec, name, attr.value())?;
            } else if name == "style" {
                if self.strict() {
                    return Err(SvgError::UnsupportedConstruct {
                        construct: format!("style attribute on <{element}>"),
                    });
                }
                css = Some(attr.value().to_string());
            } else if name != "id" && !geometry.contains(&name) {
                self.unsupported(format!("attribute {name} on <{element}>"))?;
            }
        }
        // Inline declarations take precedence over attributes.
        if let Some(css) = css {
            for (k, v) in style_declarations(&css) {
                if PRESENTATION_ATTRS.contains(&k.as_str()) {
                    self.apply_presentation(&mut spec, &k, &v)?;
                } else {
                    self.warnings.push(format!("style property {k} ignored on <{element}>"));
                }
            }
        }
        Ok(spec)
    }

    fn children(&mut self, parent: Node, inherited: &StyleSpec) -> Result<(), SvgError> {
        for node in parent.children().filter(Node::is_element) {
            let name = node.tag_name().name();
            match name {
                "path" | "rect" | "circle" | "ellipse" | "line" | "polygon" | "polyline" => {
                    self.drawable(node, inherited)?
                }
                "linearGradient" | "radialGradient" => {
                    if self.strict() {
                        return Err(SvgError::GradientUnsupported {
                            id: node.attribute("id").unwrap_or_default().to_string(),
                        });
                    }
                }
                "defs" => {
                    for child in node.children().filter(Node::is_element) {
                        if is_gradient(&child) {
                            if self.strict() {
                                return Err(SvgError::GradientUnsupported {
                                    id: child.attribute("id").unwrap_or_default().to_string(),
                                });
                            }
                        } else {
                            self.unsupported(format!("<{}> in <defs>", child.tag_name().name()))?;
                        }
                    }
                }
                "g" => {
                    if self.strict() {
                        return Err(SvgError::UnsupportedConstruct { construct: "<g>".into() });
                    }
                    if node.has_attribute("transform") {
                        self.warnings.push("skipped transformed <g>".into());
                        continue;
                    }
                    let spec = self.style_attrs(node, inherited.clone(), &[])?;
                    self.children(node, &spec)?;
                }
                other => self.unsupported(format!("<{other}>"))?,
            }
        }
        Ok(())
    }

    fn drawable(&mut self, node: Node, inherited: &StyleSpec) -> Result<(), SvgError> {
        let name = node.tag_name().name();
        let geometry: &[&str] = match name {
            "path" => &["d"],
            "rect" => &["x", "y", "width", "height", "rx", "ry"],
            "circle" => &["cx", "cy", "r"],
            "ellipse" => &["cx", "cy", "rx", "ry"],
            "line" => &["x1", "y1", "x2", "y2"],
            _ => &["points"],
        };
        let spec = self.style_attrs(node, inherited.clone(), geometry)?;
        let commands = if name == "path" {
            let Some(attr) = node.attributes().find(|a| a.name() == "d") else {
                return Ok(());
            };
            let element = self.paths.len();
            parse_path_data(attr.value()).map_err(|source| SvgError::PathData {
                element,
                offset: attr.range_value().start + source.offset(),
                source,
            })?
        } else {
            let shape = self.shape(node)?;
            shape_to_path(&shape, self.mode)?
        };
        if commands.is_empty() {
            return Ok(());
        }
        self.paths.push(RawPath {
            commands,
            style: spec.resolve(),
        });
        Ok(())
    }

    fn attr_number(&self, node: Node, name: &str) -> Result<f64, SvgError> {
        node.attribute(name).map_or(Ok(0.0), |v| self.number(name, v))
    }

    fn shape(&mut self, node: Node) -> Result<BasicShape, SvgError> {
        let n = |name: &str| self.attr_number(node, name);
        Ok(match node.tag_name().name() {
            "rect" => BasicShape::Rect {
                x: n("x")?,
                y: n("y")?,
                width: n("width")?,
                height: n("height")?,
                rx: n("rx")?,
                ry: n("ry")?,
            },
            "circle" => BasicShape::Circle { cx: n("cx")?, cy: n("cy")?, r: n("r")? },
            "ellipse" => BasicShape::Ellipse {
                cx: n("cx")?,
                cy: n("cy")?,
                rx: n("rx")?,
                ry: n("ry")?,
            },
            "line" => BasicShape::Line {
                x1: n("x1")?,
                y1: n("y1")?,
                x2: n("x2")?,
                y2: n("y2")?,
            },
            other => {
                let raw = node.attribute("points").unwrap_or("");
                let mut nums = Vec::new();
                for tok in raw.split(|c: char| c.is_whitespace() || c == ',').filter(|t| !t.is_empty()) {
                    nums.push(self.number("points", tok)?);
                }
                if nums.len() % 2 == 1 {
                    if self.strict() {
                        return Err(SvgError::InvalidAttribute {
                            name: "points".into(),
                            value: raw.into(),
                        });
                    }
                    self.warnings.push(format!("odd coordinate count on <{other}>"));
                    nums.pop();
                }
                let pts = nums.chunks(2).map(|c| Point::new(c[0], c[1])).collect();
                if other == "polygon" {
                    BasicShape::Polygon(pts)
                } else {
                    BasicShape::Polyline(pts)
                }
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::svg::PathCommand;

    fn wrap(body: &str) -> String {
        format!("<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 200 200\">{body}</svg>")
    }

    #[test]
    fn minimal_document() {
        let doc = parse_svg(&wrap("<path d=\"M 0 0 L 10 10 Z\"/>"), ParseMode::Strict).unwrap();
        assert_eq!(doc.len(), 1);
        assert_eq!(doc.view_box(), ViewBox::square(200.0));
    }

    #[test]
    fn rect_becomes_path() {
        let doc = parse_svg(&wrap("<rect x=\"0\" y=\"0\" width=\"10\" height=\"10\"/>"), ParseMode::Strict)
            .unwrap();
        let p = |x, y| Point::new(x, y);
        assert_eq!(
            doc.paths()[0].commands(),
            &[
                PathCommand::MoveTo(p(0.0, 0.0)),
                PathCommand::LineTo(p(10.0, 0.0)),
                PathCommand::LineTo(p(10.0, 10.0)),
                PathCommand::LineTo(p(0.0, 10.0)),
                PathCommand::Close,
            ]
        );
    }

    #[test]
    fn truncated_markup() {
        let err = parse_svg("<svg viewBox=\"0 0 1 1\"><path d=\"M0 0\"", ParseMode::Lenient).unwrap_err();
        assert!(matches!(err, SvgError::MalformedMarkup { .. }), "{err:?}");
    }

    #[test]
    fn missing_viewbox() {
        let err = parse_svg("<svg><path d=\"M0 0\"/></svg>", ParseMode::Strict).unwrap_err();
        assert_eq!(err, SvgError::MissingViewBox);
    }

    #[test]
    fn lenient_viewbox_from_size() {
        let parsed = parse_svg_raw(
            "<svg width=\"24\" height=\"24\"><path d=\"M0 0L1 1\"/></svg>",
            ParseMode::Lenient,
        )
        .unwrap();
        assert_eq!(parsed.view_box, ViewBox::square(24.0));
        assert_eq!(parsed.warnings.len(), 1);
    }

    #[test]
    fn gradient_strict_and_lenient() {
        let body = "<defs><linearGradient id=\"g\"><stop offset=\"0\" stop-color=\"#ff0000\"/>\
                    <stop offset=\"1\" stop-color=\"#0000ff\"/></linearGradient></defs>\
                    <path d=\"M0 0L10 0L10 10Z\" fill=\"url(#g)\"/>";
        assert_eq!(
            parse_svg(&wrap(body), ParseMode::Strict).unwrap_err(),
            SvgError::GradientUnsupported { id: "g".into() }
        );
        let doc = parse_svg(&wrap(body), ParseMode::Lenient).unwrap();
        assert_eq!(doc.paths()[0].style().fill, Some(Rgba::opaque(255, 0, 0)));
    }

    #[test]
    fn unknown_element_strict_vs_lenient() {
        let body = "<text>hi</text><path d=\"M0 0L1 1\"/>";
        assert!(matches!(
            parse_svg(&wrap(body), ParseMode::Strict),
            Err(SvgError::UnsupportedConstruct { .. })
        ));
        let parsed = parse_svg_raw(&wrap(body), ParseMode::Lenient).unwrap();
        assert_eq!(parsed.paths.len(), 1);
        assert_eq!(parsed.warnings, vec!["skipped <text>".to_string()]);
    }

    #[test]
    fn lenient_group_inherits_fill() {
        let body = "<g fill=\"#00ff00\"><path d=\"M0 0L5 0L5 5Z\"/></g>";
        let doc = parse_svg(&wrap(body), ParseMode::Lenient).unwrap();
        assert_eq!(doc.paths()[0].style().fill, Some(Rgba::opaque(0, 255, 0)));
    }

    #[test]
    fn inline_style_in_lenient_mode() {
        let body = "<path d=\"M0 0L5 0L5 5Z\" style=\"fill:#112233;stroke:red;stroke-width:2\"/>";
        let doc = parse_svg(&wrap(body), ParseMode::Lenient).unwrap();
        let style = doc.paths()[0].style();
        assert_eq!(style.fill, Some(Rgba::opaque(0x11, 0x22, 0x33)));
        assert_eq!(style.stroke, Some(Rgba::opaque(255, 0, 0)));
        assert_eq!(style.stroke_width, 2.0);
    }

    #[test]
    fn path_data_offset_is_document_relative() {
        let text = wrap("<path d=\"M 0\"/>");
        let err = parse_svg(&text, ParseMode::Strict).unwrap_err();
        let start = text.find("M 0").unwrap();
        match err {
            SvgError::PathData { offset, .. } => assert_eq!(offset, start + 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn opacity_combines() {
        let body = "<path d=\"M0 0L5 0L5 5Z\" fill=\"#000\" fill-opacity=\"0.5\" opacity=\"0.5\"/>";
        let doc = parse_svg(&wrap(body), ParseMode::Strict).unwrap();
        assert_eq!(doc.paths()[0].style().fill.unwrap().a, 0.25);
    }
}
