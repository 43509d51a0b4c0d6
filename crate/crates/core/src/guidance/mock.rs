use crate::raster::{render, RasterImage, MIN_RESOLUTION};
use crate::synth::{keyed_rng, random_document};

use super::{require_text, truncate_words, GuidanceError, GuidanceTools};

pub const BLANK_CAPTION: &str = "blank white canvas";
pub const SUGGESTION_PREFIX: &str = "add remaining elements to match: ";

const COLOR_NAMES: [(&str, [u8; 3]); 10] = [
    ("black", [0, 0, 0]),
    ("gray", [128, 128, 128]),
    ("red", [220, 40, 50]),
    ("orange", [245, 150, 70]),
    ("yellow", [235, 200, 90]),
    ("green", [50, 160, 80]),
    ("teal", [40, 150, 140]),
    ("blue", [60, 110, 170]),
    ("navy", [30, 60, 90]),
    ("purple", [110, 70, 150]),
];

/// Offline guidance backend. Every output is a pure function of the inputs and seed.
#[derive(Clone, Debug)]
pub struct MockGuidance {
    pub resolution: u32,
}

impl MockGuidance {
    pub const PROVIDER: &'static str = "mock:guidance";

    pub fn new(resolution: u32) -> Self {
        MockGuidance { resolution }
    }
}

fn nearest_color(rgb: [u8; 3]) -> usize {
    let dist = |c: [u8; 3]| -> i32 { (0..3).map(|i| (rgb[i] as i32 - c[i] as i32).pow(2)).sum() };
    (0..COLOR_NAMES.len()).min_by_key(|&i| dist(COLOR_NAMES[i].1)).unwrap()
}

fn describe(image: &RasterImage) -> String {
    let mut counts = [0usize; COLOR_NAMES.len()];
    let mut ink = 0usize;
    for px in image.pixel_iter() {
        if px != [255, 255, 255] {
            ink += 1;
            counts[nearest_color(px)] += 1;
        }
    }
    if ink == 0 {
        return BLANK_CAPTION.to_string();
    }
    let mut order: Vec<usize> = (0..counts.len()).filter(|&i| counts[i] > 0).collect();
    order.sort_by(|&a, &b| counts[b].cmp(&counts[a]).then(a.cmp(&b)));
    let colors = order.iter().take(2).map(|&i| COLOR_NAMES[i].0).collect::<Vec<_>>().join(" and ");
    let pct = (100.0 * ink as f64 / (image.width() as f64 * image.height() as f64)).round();
    format!("a minimalist icon with {colors} shapes covering about {pct}% of a white canvas")
}

impl GuidanceTools for MockGuidance {
    fn provider(&self) -> String {
        Self::PROVIDER.into()
    }

    fn text_to_image(&self, text: &str, seed: u64) -> Result<RasterImage, GuidanceError> {
        require_text(text)?;
        let mut rng = keyed_rng(&[b"text_to_image", text.as_bytes(), &seed.to_le_bytes()]);
        Ok(render(&random_document(&mut rng, 3), self.resolution))
    }

    fn edit_image(&self, image: &RasterImage, text: &str, seed: u64) -> Result<RasterImage, GuidanceError> {
        require_text(text)?;
        let side = image.width().max(image.height());
        let mut out = image.clone();
        if side < MIN_RESOLUTION {
            return Ok(out);
        }
        let hash = image.content_hash();
        let mut rng = keyed_rng(&[b"edit_image", hash.as_bytes(), text.as_bytes(), &seed.to_le_bytes()]);
        let overlay = render(&random_document(&mut rng, 2), side);
        for y in 0..image.height() {
            for x in 0..image.width() {
                if image.pixel(x, y) == [255, 255, 255] {
                    out.set_pixel(x, y, overlay.pixel(x, y));
                }
            }
        }
        Ok(out)
    }

    fn caption_image(&self, image: &RasterImage, _seed: u64) -> Result<String, GuidanceError> {
        Ok(truncate_words(&describe(image)))
    }

    fn suggest_completion(&self, text: &str, _partial: &RasterImage, _seed: u64) -> Result<String, GuidanceError> {
        require_text(text)?;
        Ok(format!("{SUGGESTION_PREFIX}{text}"))
    }
}
