use crate::raster::RasterImage;

use super::select::{Metric, ReferenceKind, Score};
use super::MetricError;

pub const SSIM_WINDOW: usize = 11;
pub const SSIM_SIGMA: f64 = 1.5;
pub const SSIM_C1: f64 = (0.01 * 255.0) * (0.01 * 255.0);
pub const SSIM_C2: f64 = (0.03 * 255.0) * (0.03 * 255.0);

fn same_dims(a: &RasterImage, b: &RasterImage) -> Result<(), MetricError> {
    if a.width() != b.width() || a.height() != b.height() {
        return Err(MetricError::DimensionMismatch {
            a: (a.width(), a.height()),
            b: (b.width(), b.height()),
        });
    }
    Ok(())
}

/// Mean squared difference over all channels, intensities scaled to `[0, 1]`.
pub fn mse(a: &RasterImage, b: &RasterImage) -> Result<Score, MetricError> {
    same_dims(a, b)?;
    let sum: f64 = a
        .pixels()
        .iter()
        .zip(b.pixels())
        .map(|(&x, &y)| {
            let d = (x as f64 - y as f64) / 255.0;
            d * d
        })
        .sum();
    Ok(Score::new(Metric::Mse, sum / a.pixels().len() as f64, ReferenceKind::Image))
}

/// Normalized 1-D Gaussian taps of length [`SSIM_WINDOW`].
pub fn gaussian_window() -> [f64; SSIM_WINDOW] {
    let mut w = [0.0; SSIM_WINDOW];
    let c = (SSIM_WINDOW / 2) as f64;
    for (i, v) in w.iter_mut().enumerate() {
        let d = i as f64 - c;
        *v = (-d * d / (2.0 * SSIM_SIGMA * SSIM_SIGMA)).exp();
    }
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|v| *v /= total);
    w
}

/// Separable Gaussian filter keeping only positions where the window fits.
fn filter_valid(src: &[f64], width: usize, height: usize, taps: &[f64; SSIM_WINDOW]) -> Vec<f64> {
    let ow = width - SSIM_WINDOW + 1;
    let oh = height - SSIM_WINDOW + 1;
    let mut horiz = vec![0.0; ow * height];
    for y in 0..height {
        let row = &src[y * width..(y + 1) * width];
        for x in 0..ow {
            horiz[y * ow + x] = taps.iter().zip(&row[x..x + SSIM_WINDOW]).map(|(t, v)| t * v).sum();
        }
    }
    let mut out = vec![0.0; ow * oh];
    for y in 0..oh {
        for x in 0..ow {
            out[y * ow + x] = taps.iter().enumerate().map(|(k, t)| t * horiz[(y + k) * ow + x]).sum();
        }
    }
    out
}

/// Mean structural similarity of the luma channels over all full windows.
pub fn ssim(a: &RasterImage, b: &RasterImage) -> Result<Score, MetricError> {
    same_dims(a, b)?;
    let (w, h) = (a.width() as usize, a.height() as usize);
    if w < SSIM_WINDOW || h < SSIM_WINDOW {
        return Err(MetricError::TooSmall {
            width: a.width(),
            height: a.height(),
            window: SSIM_WINDOW,
        });
    }
    let taps = gaussian_window();
    let x = a.luma();
    let y = b.luma();
    let xx: Vec<f64> = x.iter().map(|v| v * v).collect();
    let yy: Vec<f64> = y.iter().map(|v| v * v).collect();
    let xy: Vec<f64> = x.iter().zip(&y).map(|(p, q)| p * q).collect();

    let mu_x = filter_valid(&x, w, h, &taps);
    let mu_y = filter_valid(&y, w, h, &taps);
    let e_xx = filter_valid(&xx, w, h, &taps);
    let e_yy = filter_valid(&yy, w, h, &taps);
    let e_xy = filter_valid(&xy, w, h, &taps);

    let mut total = 0.0;
    for i in 0..mu_x.len() {
        let (mx, my) = (mu_x[i], mu_y[i]);
        let vx = e_xx[i] - mx * mx;
        let vy = e_yy[i] - my * my;
        let cov = e_xy[i] - mx * my;
        total += ((2.0 * mx * my + SSIM_C1) * (2.0 * cov + SSIM_C2))
            / ((mx * mx + my * my + SSIM_C1) * (vx + vy + SSIM_C2));
    }
    Ok(Score::new(Metric::Ssim, total / mu_x.len() as f64, ReferenceKind::Image))
}
