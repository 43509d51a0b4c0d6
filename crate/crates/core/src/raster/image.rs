use std::io::Cursor;

use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ImageError {
    #[error("pixel buffer has {actual} bytes, expected {expected} for {width}x{height}")]
    BufferSize {
        width: u32,
        height: u32,
        expected: usize,
        actual: usize,
    },
    #[error("image dimensions must be at least 1x1")]
    Empty,
    #[error("png decode: {0}")]
    PngDecode(#[from] png::DecodingError),
    #[error("png encode: {0}")]
    PngEncode(#[from] png::EncodingError),
    #[error("unsupported image encoding: {0}")]
    Unsupported(String),
}

/// Row-major RGB8 raster.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RasterImage {
    width: u32,
    height: u32,
    pixels: Vec<u8>,
}

impl RasterImage {
    pub fn new(width: u32, height: u32, pixels: Vec<u8>) -> Result<Self, ImageError> {
        if width == 0 || height == 0 {
            return Err(ImageError::Empty);
        }
        let expected = width as usize * height as usize * 3;
        if pixels.len() != expected {
            return Err(ImageError::BufferSize {
                width,
                height,
                expected,
                actual: pixels.len(),
            });
        }
        Ok(RasterImage { width, height, pixels })
    }

    pub fn filled(width: u32, height: u32, rgb: [u8; 3]) -> Self {
        assert!(width > 0 && height > 0, "image dimensions must be positive");
        let pixels = rgb.iter().copied().cycle().take(width as usize * height as usize * 3).collect();
        RasterImage { width, height, pixels }
    }

    pub fn white(width: u32, height: u32) -> Self {
        Self::filled(width, height, [255, 255, 255])
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn into_pixels(self) -> Vec<u8> {
        self.pixels
    }

    fn index(&self, x: u32, y: u32) -> usize {
        (y as usize * self.width as usize + x as usize) * 3
    }

    pub fn pixel(&self, x: u32, y: u32) -> [u8; 3] {
        let i = self.index(x, y);
        [self.pixels[i], self.pixels[i + 1], self.pixels[i + 2]]
    }

    pub fn set_pixel(&mut self, x: u32, y: u32, rgb: [u8; 3]) {
        let i = self.index(x, y);
        self.pixels[i..i + 3].copy_from_slice(&rgb);
    }

    pub fn pixel_iter(&self) -> impl Iterator<Item = [u8; 3]> + '_ {
        self.pixels.chunks_exact(3).map(|c| [c[0], c[1], c[2]])
    }

    pub fn is_all_white(&self) -> bool {
        self.pixels.iter().all(|&b| b == 255)
    }

    /// Luma `0.299 R + 0.587 G + 0.114 B` on the 0–255 scale.
    pub fn luma(&self) -> Vec<f64> {
        self.pixel_iter()
            .map(|[r, g, b]| 0.299 * r as f64 + 0.587 * g as f64 + 0.114 * b as f64)
            .collect()
    }

    /// Hex SHA-256 over dimensions and pixel bytes.
    pub fn content_hash(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.width.to_le_bytes());
        h.update(self.height.to_le_bytes());
        h.update(&self.pixels);
        hex(&h.finalize())
    }

    pub fn to_png(&self) -> Vec<u8> {
        let mut out = Vec::new();
        {
            let mut enc = png::Encoder::new(&mut out, self.width, self.height);
            enc.set_color(png::ColorType::Rgb);
            enc.set_depth(png::BitDepth::Eight);
            let mut writer = enc.write_header().expect("in-memory png header");
            writer.write_image_data(&self.pixels).expect("in-memory png data");
        }
        out
    }

    /// Decodes a PNG, compositing any alpha channel over white.
    pub fn from_png(bytes: &[u8]) -> Result<Self, ImageError> {
        let mut decoder = png::Decoder::new(Cursor::new(bytes));
        decoder.set_transformations(png::Transformations::EXPAND | png::Transformations::STRIP_16);
        let mut reader = decoder.read_info()?;
        let size = reader
            .output_buffer_size()
            .ok_or_else(|| ImageError::Unsupported("png too large".into()))?;
        let mut buf = vec![0; size];
        let info = reader.next_frame(&mut buf)?;
        let data = &buf[..info.buffer_size()];
        let over_white = |v: u8, a: u8| {
            let a = a as u32;
            ((v as u32 * a + 255 * (255 - a) + 127) / 255) as u8
        };
        let pixels: Vec<u8> = match info.color_type {
            png::ColorType::Rgb => data.to_vec(),
            png::ColorType::Rgba => data
                .chunks_exact(4)
                .flat_map(|c| [over_white(c[0], c[3]), over_white(c[1], c[3]), over_white(c[2], c[3])])
                .collect(),
            png::ColorType::Grayscale => data.iter().flat_map(|&g| [g, g, g]).collect(),
            png::ColorType::GrayscaleAlpha => data
                .chunks_exact(2)
                .flat_map(|c| {
                    let g = over_white(c[0], c[1]);
                    [g, g, g]
                })
                .collect(),
            other => return Err(ImageError::Unsupported(format!("{other:?}"))),
        };
        RasterImage::new(info.width, info.height, pixels)
    }

    /// Binary PPM (P6).
    pub fn to_ppm(&self) -> Vec<u8> {
        let mut out = format!("P6\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend_from_slice(&self.pixels);
        out
    }

    pub fn from_ppm(bytes: &[u8]) -> Result<Self, ImageError> {
        let bad = || ImageError::Unsupported("malformed P6 header".into());
        let mut fields = Vec::new();
        let mut pos = 0;
        while fields.len() < 4 {
            while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            if pos < bytes.len() && bytes[pos] == b'#' {
                while pos < bytes.len() && bytes[pos] != b'\n' {
                    pos += 1;
                }
                continue;
            }
            let start = pos;
            while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            if start == pos {
                return Err(bad());
            }
            fields.push(std::str::from_utf8(&bytes[start..pos]).map_err(|_| bad())?);
        }
        if fields[0] != "P6" || fields[3] != "255" {
            return Err(bad());
        }
        let w: u32 = fields[1].parse().map_err(|_| bad())?;
        let h: u32 = fields[2].parse().map_err(|_| bad())?;
        let data = bytes.get(pos + 1..).ok_or_else(bad)?;
        let n = w as usize * h as usize * 3;
        RasterImage::new(w, h, data.get(..n).ok_or_else(bad)?.to_vec())
    }

    /// Decodes PNG or P6 PPM by signature.
    pub fn decode(bytes: &[u8]) -> Result<Self, ImageError> {
        if bytes.starts_with(b"\x89PNG") {
            Self::from_png(bytes)
        } else if bytes.starts_with(b"P6") {
            Self::from_ppm(bytes)
        } else {
            Err(ImageError::Unsupported("expected PNG or P6 PPM".into()))
        }
    }

    /// Area-weighted resampling onto a `side`×`side` white canvas, preserving
    /// aspect ratio and centering the image. Identity for a square image of size `side`.
    pub fn resample_letterbox(&self, side: u32) -> RasterImage {
        if self.width == side && self.height == side {
            return self.clone();
        }
        let (w, h) = (self.width as f64, self.height as f64);
        let scale = side as f64 / w.max(h);
        let ox = (side as f64 - w * scale) / 2.0;
        let oy = (side as f64 - h * scale) / 2.0;
        let mut out = Vec::with_capacity(side as usize * side as usize * 3);
        for v in 0..side {
            let y0 = (v as f64 - oy) / scale;
            let y1 = (v as f64 + 1.0 - oy) / scale;
            for u in 0..side {
                let x0 = (u as f64 - ox) / scale;
                let x1 = (u as f64 + 1.0 - ox) / scale;
                out.extend_from_slice(&self.area_average(x0, y0, x1, y1));
            }
        }
        RasterImage { width: side, height: side, pixels: out }
    }

    /// Mean color over a source-space rectangle; area outside the image counts as white.
    fn area_average(&self, x0: f64, y0: f64, x1: f64, y1: f64) -> [u8; 3] {
        let total = (x1 - x0) * (y1 - y0);
        let mut acc = [0.0f64; 3];
        let mut covered = 0.0;
        let sx0 = x0.max(0.0).floor() as i64;
        let sy0 = y0.max(0.0).floor() as i64;
        let sx1 = (x1.min(self.width as f64)).ceil() as i64;
        let sy1 = (y1.min(self.height as f64)).ceil() as i64;
        for sy in sy0..sy1 {
            let hy = (y1.min(sy as f64 + 1.0) - y0.max(sy as f64)).max(0.0);
            if hy == 0.0 {
                continue;
            }
            for sx in sx0..sx1 {
                let wx = (x1.min(sx as f64 + 1.0) - x0.max(sx as f64)).max(0.0);
                let a = wx * hy;
                if a == 0.0 {
                    continue;
                }
                let px = self.pixel(sx as u32, sy as u32);
                for c in 0..3 {
                    acc[c] += px[c] as f64 * a;
                }
                covered += a;
            }
        }
        let white = (total - covered).max(0.0) * 255.0;
        let mut rgb = [0u8; 3];
        for c in 0..3 {
            rgb[c] = ((acc[c] + white) / total).round().clamp(0.0, 255.0) as u8;
        }
        rgb
    }

    /// Box-filter downscale by an integer factor; dimensions must divide evenly.
    pub fn downscale_box(&self, factor: u32) -> RasterImage {
        assert!(factor > 0 && self.width % factor == 0 && self.height % factor == 0);
        let (w, h) = (self.width / factor, self.height / factor);
        let n = (factor * factor) as u32;
        let mut pixels = Vec::with_capacity(w as usize * h as usize * 3);
        for y in 0..h {
            for x in 0..w {
                let mut acc = [0u32; 3];
                for dy in 0..factor {
                    for dx in 0..factor {
                        let p = self.pixel(x * factor + dx, y * factor + dy);
                        for c in 0..3 {
                            acc[c] += p[c] as u32;
                        }
                    }
                }
                pixels.extend(acc.iter().map(|&s| ((s + n / 2) / n) as u8));
            }
        }
        RasterImage { width: w, height: h, pixels }
    }
}

pub(crate) fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}
