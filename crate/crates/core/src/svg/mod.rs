//! Typed model of the supported SVG dialect, its parser and its canonical writer.

mod color;
mod document;
mod parse;
mod path_data;
mod shapes;
pub mod write;

pub use color::{parse_color, parse_paint, Paint};
pub use document::{
    ArcSegment, DocumentError, FillRule, PathCommand, PathStyle, Rgba, SvgDocument, SvgPath, ViewBox,
};
pub use parse::{parse_svg, parse_svg_raw, ParsedSvg, RawPath, SvgError};
pub use path_data::{arity, parse_path_data, PathDataError, RawCommand};
pub use shapes::{shape_to_path, BasicShape, ShapeError};
pub use write::{format_number, path_data_string, serialize_path, serialize_svg};

/// Strict parsing rejects anything outside the dialect; lenient parsing skips or
/// substitutes it and records a warning.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ParseMode {
    Strict,
    #[default]
    Lenient,
}
