use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyBytes;

use svgpipe_core::dataset;
use svgpipe_core::metrics;
use svgpipe_core::normalize;
use svgpipe_core::raster::{self, RasterImage};
use svgpipe_core::svg::{self, ParseMode, SvgDocument};
use svgpipe_core::workflows::{Pipeline, TaskQuery};

fn value_error(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn mode(strict: bool) -> ParseMode {
    if strict {
        ParseMode::Strict
    } else {
        ParseMode::Lenient
    }
}

/// A parsed SVG document.
#[pyclass(name = "Document", frozen)]
struct PyDocument(SvgDocument);

#[pymethods]
impl PyDocument {
    #[staticmethod]
    #[pyo3(signature = (text, strict = false))]
    fn parse(text: &str, strict: bool) -> PyResult<Self> {
        svg::parse_svg(text, mode(strict)).map(PyDocument).map_err(value_error)
    }

    fn normalize(&self) -> Self {
        PyDocument(normalize::normalize(&self.0))
    }

    fn to_svg(&self) -> String {
        svg::serialize_svg(&self.0)
    }

    /// `(min_x, min_y, width, height)`
    #[getter]
    fn view_box(&self) -> (f64, f64, f64, f64) {
        let v = self.0.view_box();
        (v.min_x, v.min_y, v.width, v.height)
    }

    /// Path data of every path, in document order.
    #[getter]
    fn path_data(&self) -> Vec<String> {
        self.0.paths().iter().map(|p| svg::path_data_string(p.commands())).collect()
    }

    fn prefix(&self, n: usize) -> Self {
        PyDocument(self.0.prefix(n))
    }

    #[pyo3(signature = (resolution = raster::DEFAULT_RESOLUTION))]
    fn render(&self, resolution: u32) -> PyResult<PyImage> {
        if resolution < raster::MIN_RESOLUTION {
            return Err(value_error(format!("resolution must be at least {}", raster::MIN_RESOLUTION)));
        }
        Ok(PyImage(raster::render(&self.0, resolution)))
    }

    /// Pen trajectory as `U x y` / `D x y` lines.
    #[pyo3(signature = (spacing = 1.0))]
    fn trajectory(&self, spacing: f64) -> PyResult<String> {
        if !(spacing > 0.0 && spacing.is_finite()) {
            return Err(value_error("spacing must be positive"));
        }
        Ok(raster::path_to_trajectory(&self.0, spacing).to_text())
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.0 == other.0
    }

    fn __repr__(&self) -> String {
        format!("Document(paths={}, view_box={:?})", self.0.len(), self.view_box())
    }
}

/// An 8-bit RGB raster.
#[pyclass(name = "Image", frozen)]
struct PyImage(RasterImage);

#[pymethods]
impl PyImage {
    #[staticmethod]
    fn decode(data: &[u8]) -> PyResult<Self> {
        RasterImage::decode(data).map(PyImage).map_err(value_error)
    }

    #[staticmethod]
    fn from_rgb(width: u32, height: u32, pixels: Vec<u8>) -> PyResult<Self> {
        RasterImage::new(width, height, pixels).map(PyImage).map_err(value_error)
    }

    #[getter]
    fn width(&self) -> u32 {
        self.0.width()
    }

    #[getter]
    fn height(&self) -> u32 {
        self.0.height()
    }

    fn pixels<'py>(&self, py: Python<'py>) -> Bound<'py, PyBytes> {
        PyBytes::new(py, self.0.pixels())
    }

    fn to_png<'py>(&self, py: Python<'py>) -> Bound<'py, PyBytes> {
        PyBytes::new(py, &self.0.to_png())
    }

    fn to_ppm<'py>(&self, py: Python<'py>) -> Bound<'py, PyBytes> {
        PyBytes::new(py, &self.0.to_ppm())
    }

    fn __repr__(&self) -> String {
        format!("Image({}x{})", self.0.width(), self.0.height())
    }
}

#[pyfunction]
#[pyo3(signature = (text, strict = false))]
fn normalize_svg(text: &str, strict: bool) -> PyResult<String> {
    let parsed = svg::parse_svg_raw(text, mode(strict)).map_err(value_error)?;
    let doc = normalize::normalize_raw(&parsed).map_err(value_error)?;
    Ok(svg::serialize_svg(&doc))
}

#[pyfunction]
fn ssim(a: &PyImage, b: &PyImage) -> PyResult<f64> {
    metrics::ssim(&a.0, &b.0).map(|s| s.value).map_err(value_error)
}

#[pyfunction]
fn mse(a: &PyImage, b: &PyImage) -> PyResult<f64> {
    metrics::mse(&a.0, &b.0).map(|s| s.value).map_err(value_error)
}

/// CLIP-style score against the offline histogram embedder.
#[pyfunction]
fn mock_clip_score(text: &str, image: &PyImage) -> PyResult<f64> {
    metrics::clip_score(text, &image.0, &metrics::HistogramEmbedder)
        .map(|s| s.value)
        .map_err(value_error)
}

/// Returns `(valid, [(code, message), ...])`.
#[pyfunction]
fn check_svg(text: &str) -> (bool, Vec<(String, String)>) {
    let r = metrics::check_svg(text);
    (r.valid, r.diagnostics.into_iter().map(|d| (d.code, d.message)).collect())
}

#[pyfunction]
fn preservation_check(partial: &PyDocument, output: &PyDocument) -> bool {
    metrics::preservation_check(&partial.0, &output.0)
}

#[pyfunction]
fn derive_partial(doc: &PyDocument, seed: u64) -> PyResult<PyDocument> {
    dataset::derive_partial(&doc.0, seed).map(PyDocument).map_err(value_error)
}

/// Returns `(train, test)` id lists.
#[pyfunction]
#[pyo3(signature = (ids, test_size = dataset::DEFAULT_TEST_SIZE, seed = 0))]
fn split(ids: Vec<String>, test_size: usize, seed: u64) -> PyResult<(Vec<String>, Vec<String>)> {
    dataset::split(&ids, test_size, seed).map(|s| (s.train, s.test)).map_err(value_error)
}

/// Workflows over the offline mock backends. Results are JSON strings.
#[pyclass(name = "MockPipeline", frozen)]
struct PyMockPipeline(Pipeline);

impl PyMockPipeline {
    fn run(&self, py: Python<'_>, query: TaskQuery) -> PyResult<String> {
        let pipeline = self.0.clone();
        py.detach(move || pipeline.run(&query))
            .map(|r| r.to_json().to_string())
            .map_err(|e| PyRuntimeError::new_err(format!("{}: {e}", e.code())))
    }
}

#[pymethods]
impl PyMockPipeline {
    #[new]
    fn new() -> Self {
        PyMockPipeline(Pipeline::mock())
    }

    fn text_to_svg(&self, py: Python<'_>, id: &str, text: &str, seed: u64) -> PyResult<String> {
        self.run(py, TaskQuery::text_to_svg(id, text, seed))
    }

    fn image_to_svg(&self, py: Python<'_>, id: &str, image: &PyImage, seed: u64) -> PyResult<String> {
        self.run(py, TaskQuery::image_to_svg(id, image.0.clone(), seed))
    }

    fn partialsvg_to_svg(&self, py: Python<'_>, id: &str, text: &str, partial: &PyDocument, seed: u64) -> PyResult<String> {
        self.run(py, TaskQuery::partialsvg_to_svg(id, text, partial.0.clone(), seed))
    }

    fn partialimage_to_svg(&self, py: Python<'_>, id: &str, text: &str, image: &PyImage, seed: u64) -> PyResult<String> {
        self.run(py, TaskQuery::partialimage_to_svg(id, text, image.0.clone(), seed))
    }
}

#[pymodule]
fn svgpipe(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyDocument>()?;
    m.add_class::<PyImage>()?;
    m.add_class::<PyMockPipeline>()?;
    m.add_function(wrap_pyfunction!(normalize_svg, m)?)?;
    m.add_function(wrap_pyfunction!(ssim, m)?)?;
    m.add_function(wrap_pyfunction!(mse, m)?)?;
    m.add_function(wrap_pyfunction!(mock_clip_score, m)?)?;
    m.add_function(wrap_pyfunction!(check_svg, m)?)?;
    m.add_function(wrap_pyfunction!(preservation_check, m)?)?;
    m.add_function(wrap_pyfunction!(derive_partial, m)?)?;
    m.add_function(wrap_pyfunction!(split, m)?)?;
    Ok(())
}
