//! Rendering of documents to RGB rasters and conversion to pen trajectories.

pub mod arc;
mod fill;
pub mod flatten;
mod image;
mod render;
mod trajectory;

pub use fill::{coverage_mask, stroke_polygons, SUBSAMPLES};
pub use flatten::{flatten_cubic, flatten_path, Polyline, DEFAULT_TOLERANCE};
pub use image::{ImageError, RasterImage};
pub(crate) use image::hex;
pub use render::{render, DeviceTransform, DEFAULT_RESOLUTION, MIN_RESOLUTION};
pub use trajectory::{path_to_trajectory, PenState, Trajectory, TrajectorySegment};
