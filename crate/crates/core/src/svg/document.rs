use std::fmt;

use serde::{Deserialize, Serialize};

use crate::geom::Point;

/// One command of the restricted, absolute path alphabet `{M, L, C, Q, A, Z}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PathCommand {
    MoveTo(Point),
    LineTo(Point),
    CubicTo { ctrl1: Point, ctrl2: Point, to: Point },
    QuadTo { ctrl: Point, to: Point },
    ArcTo(ArcSegment),
    Close,
}

/// Endpoint-parameterized elliptical arc. The rotation is in degrees.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ArcSegment {
    pub rx: f64,
    pub ry: f64,
    pub x_rotation: f64,
    pub large_arc: bool,
    pub sweep: bool,
    pub to: Point,
}

impl PathCommand {
    pub fn letter(&self) -> char {
        match self {
            PathCommand::MoveTo(_) => 'M',
            PathCommand::LineTo(_) => 'L',
            PathCommand::CubicTo { .. } => 'C',
            PathCommand::QuadTo { .. } => 'Q',
            PathCommand::ArcTo(_) => 'A',
            PathCommand::Close => 'Z',
        }
    }

    /// End point of the command, `None` for `Z` (which returns to the subpath start).
    pub fn end_point(&self) -> Option<Point> {
        match *self {
            PathCommand::MoveTo(p) | PathCommand::LineTo(p) => Some(p),
            PathCommand::CubicTo { to, .. } | PathCommand::QuadTo { to, .. } => Some(to),
            PathCommand::ArcTo(arc) => Some(arc.to),
            PathCommand::Close => None,
        }
    }

    /// Applies `point` to every coordinate pair and `length` to arc radii.
    /// Arc rotation and flags are passed through `angle` and left alone respectively.
    pub fn transform(
        &self,
        point: impl Fn(Point) -> Point,
        length: impl Fn(f64) -> f64,
        angle: impl Fn(f64) -> f64,
    ) -> PathCommand {
        match *self {
            PathCommand::MoveTo(p) => PathCommand::MoveTo(point(p)),
            PathCommand::LineTo(p) => PathCommand::LineTo(point(p)),
            PathCommand::CubicTo { ctrl1, ctrl2, to } => PathCommand::CubicTo {
                ctrl1: point(ctrl1),
                ctrl2: point(ctrl2),
                to: point(to),
            },
            PathCommand::QuadTo { ctrl, to } => PathCommand::QuadTo {
                ctrl: point(ctrl),
                to: point(to),
            },
            PathCommand::ArcTo(arc) => PathCommand::ArcTo(ArcSegment {
                rx: length(arc.rx),
                ry: length(arc.ry),
                x_rotation: angle(arc.x_rotation),
                large_arc: arc.large_arc,
                sweep: arc.sweep,
                to: point(arc.to),
            }),
            PathCommand::Close => PathCommand::Close,
        }
    }

    pub fn is_finite(&self) -> bool {
        match *self {
            PathCommand::MoveTo(p) | PathCommand::LineTo(p) => p.is_finite(),
            PathCommand::CubicTo { ctrl1, ctrl2, to } => {
                ctrl1.is_finite() && ctrl2.is_finite() && to.is_finite()
            }
            PathCommand::QuadTo { ctrl, to } => ctrl.is_finite() && to.is_finite(),
            PathCommand::ArcTo(a) => {
                a.rx.is_finite() && a.ry.is_finite() && a.x_rotation.is_finite() && a.to.is_finite()
            }
            PathCommand::Close => true,
        }
    }

    /// All coordinate pairs the command carries, controls included.
    pub fn points(&self) -> Vec<Point> {
        match *self {
            PathCommand::MoveTo(p) | PathCommand::LineTo(p) => vec![p],
            PathCommand::CubicTo { ctrl1, ctrl2, to } => vec![ctrl1, ctrl2, to],
            PathCommand::QuadTo { ctrl, to } => vec![ctrl, to],
            PathCommand::ArcTo(a) => vec![a.to],
            PathCommand::Close => vec![],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rgba {
    pub r: u8,
    pub g: u8,
    pub b: u8,
    /// Opacity in `[0, 1]`.
    pub a: f64,
}

impl Rgba {
    pub const BLACK: Rgba = Rgba::opaque(0, 0, 0);
    pub const WHITE: Rgba = Rgba::opaque(255, 255, 255);

    pub const fn opaque(r: u8, g: u8, b: u8) -> Self {
        Rgba { r, g, b, a: 1.0 }
    }

    pub fn with_alpha(self, a: f64) -> Self {
        Rgba { a: a.clamp(0.0, 1.0), ..self }
    }

    pub fn hex(&self) -> String {
        format!("#{:02x}{:02x}{:02x}", self.r, self.g, self.b)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FillRule {
    #[default]
    NonZero,
    EvenOdd,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PathStyle {
    pub fill: Option<Rgba>,
    pub fill_rule: FillRule,
    pub stroke: Option<Rgba>,
    pub stroke_width: f64,
}

impl Default for PathStyle {
    fn default() -> Self {
        PathStyle {
            fill: Some(Rgba::BLACK),
            fill_rule: FillRule::NonZero,
            stroke: None,
            stroke_width: 1.0,
        }
    }
}

impl PathStyle {
    pub fn filled(color: Rgba) -> Self {
        PathStyle {
            fill: Some(color),
            ..PathStyle::default()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ViewBox {
    pub min_x: f64,
    pub min_y: f64,
    pub width: f64,
    pub height: f64,
}

impl ViewBox {
    pub const fn new(min_x: f64, min_y: f64, width: f64, height: f64) -> Self {
        ViewBox { min_x, min_y, width, height }
    }

    pub const fn square(side: f64) -> Self {
        ViewBox::new(0.0, 0.0, side, side)
    }

    pub fn is_valid(&self) -> bool {
        self.min_x.is_finite()
            && self.min_y.is_finite()
            && self.width.is_finite()
            && self.height.is_finite()
            && self.width > 0.0
            && self.height > 0.0
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum DocumentError {
    EmptyPath,
    MissingInitialMove,
    MissingMoveAfterClose { index: usize },
    NonFinite { index: usize },
    NegativeRadius { index: usize },
    InvalidStrokeWidth,
    InvalidAlpha,
    InvalidViewBox,
}

impl fmt::Display for DocumentError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DocumentError::EmptyPath => write!(f, "path has no commands"),
            DocumentError::MissingInitialMove => write!(f, "path does not start with M"),
            DocumentError::MissingMoveAfterClose { index } => {
                write!(f, "command {index} follows Z but is not M")
            }
            DocumentError::NonFinite { index } => write!(f, "command {index} has a non-finite number"),
            DocumentError::NegativeRadius { index } => write!(f, "arc {index} has a negative radius"),
            DocumentError::InvalidStrokeWidth => write!(f, "stroke requires a positive finite width"),
            DocumentError::InvalidAlpha => write!(f, "alpha outside [0, 1]"),
            DocumentError::InvalidViewBox => write!(f, "viewBox width and height must be positive"),
        }
    }
}

impl std::error::Error for DocumentError {}

/// A styled path: one or more subpaths sharing a paint.
#[derive(Clone, Debug, PartialEq)]
pub struct SvgPath {
    commands: Vec<PathCommand>,
    style: PathStyle,
}

impl SvgPath {
    pub fn new(commands: Vec<PathCommand>, style: PathStyle) -> Result<Self, DocumentError> {
        validate_commands(&commands)?;
        validate_style(&style)?;
        Ok(SvgPath { commands, style })
    }

    /// Skips validation; callers must preserve the invariants of an already valid path.
    pub(crate) fn from_parts(commands: Vec<PathCommand>, style: PathStyle) -> Self {
        debug_assert!(validate_commands(&commands).is_ok());
        SvgPath { commands, style }
    }

    pub fn commands(&self) -> &[PathCommand] {
        &self.commands
    }

    pub fn style(&self) -> &PathStyle {
        &self.style
    }
}

fn validate_commands(commands: &[PathCommand]) -> Result<(), DocumentError> {
    match commands.first() {
        None => return Err(DocumentError::EmptyPath),
        Some(PathCommand::MoveTo(_)) => {}
        Some(_) => return Err(DocumentError::MissingInitialMove),
    }
    for (index, cmd) in commands.iter().enumerate() {
        if !cmd.is_finite() {
            return Err(DocumentError::NonFinite { index });
        }
        if let PathCommand::ArcTo(a) = cmd {
            if a.rx < 0.0 || a.ry < 0.0 {
                return Err(DocumentError::NegativeRadius { index });
            }
        }
        if index > 0
            && matches!(commands[index - 1], PathCommand::Close)
            && !matches!(cmd, PathCommand::MoveTo(_))
        {
            return Err(DocumentError::MissingMoveAfterClose { index });
        }
    }
    Ok(())
}

fn validate_style(style: &PathStyle) -> Result<(), DocumentError> {
    let alpha_ok = |c: &Option<Rgba>| c.map_or(true, |c| (0.0..=1.0).contains(&c.a));
    if !alpha_ok(&style.fill) || !alpha_ok(&style.stroke) {
        return Err(DocumentError::InvalidAlpha);
    }
    if !style.stroke_width.is_finite() || style.stroke_width < 0.0 {
        return Err(DocumentError::InvalidStrokeWidth);
    }
    if style.stroke.is_some() && style.stroke_width <= 0.0 {
        return Err(DocumentError::InvalidStrokeWidth);
    }
    Ok(())
}

/// A document: a viewbox and its paths in document order.
#[derive(Clone, Debug, PartialEq)]
pub struct SvgDocument {
    view_box: ViewBox,
    paths: Vec<SvgPath>,
}

impl SvgDocument {
    pub fn new(view_box: ViewBox, paths: Vec<SvgPath>) -> Result<Self, DocumentError> {
        if !view_box.is_valid() {
            return Err(DocumentError::InvalidViewBox);
        }
        Ok(SvgDocument { view_box, paths })
    }

    pub fn view_box(&self) -> ViewBox {
        self.view_box
    }

    pub fn paths(&self) -> &[SvgPath] {
        &self.paths
    }

    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }

    /// The document restricted to its first `n` paths.
    pub fn prefix(&self, n: usize) -> SvgDocument {
        SvgDocument {
            view_box: self.view_box,
            paths: self.paths[..n.min(self.paths.len())].to_vec(),
        }
    }

    pub fn with_paths(&self, paths: Vec<SvgPath>) -> SvgDocument {
        SvgDocument { view_box: self.view_box, paths }
    }

    pub(crate) fn from_parts(view_box: ViewBox, paths: Vec<SvgPath>) -> Self {
        debug_assert!(view_box.is_valid());
        SvgDocument { view_box, paths }
    }
}
