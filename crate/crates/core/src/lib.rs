//! Toolkit for canonical SVG icon datasets and multimodal SVG generation
//! pipelines: parsing and normalization, rasterization, similarity metrics,
//! guidance and generator ports, task workflows with candidate selection, and
//! dataset curation.

pub mod dataset;
pub mod generator;
pub mod geom;
pub mod guidance;
pub mod metrics;
pub mod normalize;
pub mod provider;
pub mod raster;
pub mod svg;
pub mod synth;
pub mod workflows;
