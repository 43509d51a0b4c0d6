#![allow(dead_code)]

use rand::Rng;
use svgpipe_core::geom::Point;
use svgpipe_core::raster::RasterImage;
use svgpipe_core::svg::{PathCommand, PathStyle, Rgba, SvgDocument, SvgPath, ViewBox};

/// 64-bit LCG, top byte per step. Mirrored by the script that froze `SKIMAGE_SSIM`.
pub fn lcg_bytes(seed: u64, n: usize) -> Vec<u8> {
    let mut s = seed;
    (0..n)
        .map(|_| {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (s >> 56) as u8
        })
        .collect()
}

fn gray(values: &[u8], side: u32) -> RasterImage {
    let pixels = values.iter().flat_map(|&v| [v, v, v]).collect();
    RasterImage::new(side, side, pixels).unwrap()
}

/// Pair `k`: noise `a`, and `b` mixing `a` with fresh noise in the ratio `(k % 5) : (5 - k % 5)`.
pub fn ssim_pair(k: u64) -> (RasterImage, RasterImage) {
    let a = lcg_bytes(2 * k + 1, 32 * 32);
    let noise = lcg_bytes(2 * k + 2, 32 * 32);
    let mix = (k % 5) as u32;
    let b: Vec<u8> = a
        .iter()
        .zip(&noise)
        .map(|(&x, &y)| ((x as u32 * mix + y as u32 * (5 - mix)) / 5) as u8)
        .collect();
    (gray(&a, 32), gray(&b, 32))
}

/// scikit-image `structural_similarity(a, b, gaussian_weights=True, sigma=1.5,
/// use_sample_covariance=False, data_range=255)` on `ssim_pair(k)`, k = 0..50.
pub const SKIMAGE_SSIM: [f64; 50] = [
    0.01391659499749467, 0.15403471603471203, 0.46899907127744883, 0.7988906720770264, 0.9462622120510822,
    0.035067275989211534, 0.20682352938150278, 0.5512411060012186, 0.7708996582110259, 0.9494696845704541,
    0.027065493390530115, 0.2300749162628479, 0.5318985285878657, 0.7559131764176693, 0.951594225731839,
    -0.015087511597002095, 0.24242679538406464, 0.5003635991839538, 0.7752206396173887, 0.9499081880984063,
    -0.007394836975679068, 0.2292430391197636, 0.5240782941110045, 0.8003167368475967, 0.951264218099433,
    -0.022496947969355106, 0.25365833241617475, 0.5240419486490464, 0.787564008220461, 0.9532212211338849,
    0.021851438780938294, 0.1955081395943477, 0.5520215968298539, 0.7814835934602703, 0.9479319130075947,
    0.04224382525157782, 0.24115576034548813, 0.541872022679565, 0.7915933399705316, 0.9529573657218153,
    -0.0296598891822655, 0.25787724608468104, 0.5316487053837781, 0.772028358259443, 0.9513861131145894,
    0.029182735588619526, 0.20948858755454428, 0.4967790970697338, 0.7977450614293351, 0.9504332870620308,
];

/// Direct per-window SSIM: a full 11×11 Gaussian weight matrix, centered
/// second moments, averaged over every window that fits.
pub fn naive_ssim(a: &RasterImage, b: &RasterImage) -> f64 {
    const N: usize = 11;
    let luma = |img: &RasterImage| -> Vec<f64> {
        img.pixels()
            .chunks(3)
            .map(|p| 0.299 * p[0] as f64 + 0.587 * p[1] as f64 + 0.114 * p[2] as f64)
            .collect()
    };
    let (x, y) = (luma(a), luma(b));
    let (w, h) = (a.width() as usize, a.height() as usize);
    let mut weights = [[0.0f64; N]; N];
    let mut total = 0.0;
    for (i, row) in weights.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            let (di, dj) = (i as f64 - 5.0, j as f64 - 5.0);
            *v = (-(di * di + dj * dj) / (2.0 * 1.5 * 1.5)).exp();
            total += *v;
        }
    }
    let c1 = (0.01f64 * 255.0).powi(2);
    let c2 = (0.03f64 * 255.0).powi(2);
    let mut sum = 0.0;
    let mut count = 0;
    for oy in 0..=h - N {
        for ox in 0..=w - N {
            let at = |img: &[f64], i: usize, j: usize| img[(oy + i) * w + ox + j];
            let (mut mx, mut my) = (0.0, 0.0);
            for i in 0..N {
                for j in 0..N {
                    let wt = weights[i][j] / total;
                    mx += wt * at(&x, i, j);
                    my += wt * at(&y, i, j);
                }
            }
            let (mut vx, mut vy, mut cov) = (0.0, 0.0, 0.0);
            for i in 0..N {
                for j in 0..N {
                    let wt = weights[i][j] / total;
                    let dx = at(&x, i, j) - mx;
                    let dy = at(&y, i, j) - my;
                    vx += wt * dx * dx;
                    vy += wt * dy * dy;
                    cov += wt * dx * dy;
                }
            }
            sum += ((2.0 * mx * my + c1) * (2.0 * cov + c2)) / ((mx * mx + my * my + c1) * (vx + vy + c2));
            count += 1;
        }
    }
    sum / count as f64
}

pub fn shoelace(points: &[Point]) -> f64 {
    let n = points.len();
    let twice: f64 = (0..n)
        .map(|i| {
            let (a, b) = (points[i], points[(i + 1) % n]);
            a.x * b.y - b.x * a.y
        })
        .sum();
    twice.abs() / 2.0
}

/// Vertices on an ellipse at sorted random angles, which is always convex.
pub fn random_convex_polygon(rng: &mut impl Rng) -> Vec<Point> {
    let n = rng.gen_range(3..=12);
    let cx = rng.gen_range(80.0..120.0);
    let cy = rng.gen_range(80.0..120.0);
    let rx = rng.gen_range(30.0..75.0);
    let ry = rng.gen_range(30.0..75.0);
    let mut angles: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..std::f64::consts::TAU)).collect();
    angles.sort_by(f64::total_cmp);
    angles.iter().map(|t| Point::new(cx + rx * t.cos(), cy + ry * t.sin())).collect()
}

pub fn polygon_document(points: &[Point], color: Rgba) -> SvgDocument {
    let mut commands = vec![PathCommand::MoveTo(points[0])];
    commands.extend(points[1..].iter().map(|&p| PathCommand::LineTo(p)));
    commands.push(PathCommand::Close);
    let path = SvgPath::new(commands, PathStyle::filled(color)).unwrap();
    SvgDocument::new(ViewBox::square(200.0), vec![path]).unwrap()
}

/// Sum of per-pixel darkness in [0,1] divided by pixel count.
pub fn ink_fraction(img: &RasterImage) -> f64 {
    let total: f64 = img.pixels().iter().map(|&v| (255 - v) as f64 / 255.0).sum();
    total / img.pixels().len() as f64
}

pub fn mean_abs_diff(a: &RasterImage, b: &RasterImage) -> f64 {
    let total: f64 = a
        .pixels()
        .iter()
        .zip(b.pixels())
        .map(|(&p, &q)| (p as f64 - q as f64).abs())
        .sum();
    total / a.pixels().len() as f64 / 255.0
}

/// Random SVG markup exercising relative and shorthand commands, basic shapes
/// and non-canonical viewboxes.
pub fn random_svg_markup(rng: &mut impl Rng) -> String {
    let w = [24.0, 48.0, 100.0, 200.0, 512.0, 37.5][rng.gen_range(0..6)];
    let h = if rng.gen_bool(0.7) { w } else { w * rng.gen_range(0.4..1.0) };
    let coord = |rng: &mut dyn rand::RngCore, max: f64| format!("{:.3}", rng.gen_range(0.0..max));
    let mut body = String::new();
    for _ in 0..rng.gen_range(1..5) {
        let fill = ["#e63946", "#264653", "black", "none", "rgb(10,200,30)"][rng.gen_range(0..5)];
        match rng.gen_range(0..4) {
            0 => {
                let mut d = format!("M{} {}", coord(rng, w), coord(rng, h));
                for _ in 0..rng.gen_range(1..7) {
                    let step = |rng: &mut dyn rand::RngCore| format!("{:.2}", rng.gen_range(-w / 8.0..w / 8.0));
                    let seg = match rng.gen_range(0..9) {
                        0 => format!(" l{} {}", step(rng), step(rng)),
                        1 => format!(" h{}", step(rng)),
                        2 => format!(" V{}", coord(rng, h)),
                        3 => format!(" c{} {} {} {} {} {}", step(rng), step(rng), step(rng), step(rng), step(rng), step(rng)),
                        4 => format!(" s{} {} {} {}", step(rng), step(rng), step(rng), step(rng)),
                        5 => format!(" q{} {} {} {}", step(rng), step(rng), step(rng), step(rng)),
                        6 => format!(" t{} {}", step(rng), step(rng)),
                        7 => format!(" a{} {} {} {} {} {} {}", rng.gen_range(1.0..w / 4.0) as i32, rng.gen_range(1.0..w / 4.0) as i32, rng.gen_range(0..90), rng.gen_range(0..2), rng.gen_range(0..2), step(rng), step(rng)),
                        _ => format!(" L{} {}", coord(rng, w), coord(rng, h)),
                    };
                    d.push_str(&seg);
                }
                if rng.gen_bool(0.6) {
                    d.push_str(" z");
                }
                body.push_str(&format!(r#"<path d="{d}" fill="{fill}"/>"#));
            }
            1 => body.push_str(&format!(
                r#"<rect x="{}" y="{}" width="{}" height="{}" fill="{fill}"/>"#,
                coord(rng, w / 2.0),
                coord(rng, h / 2.0),
                coord(rng, w / 2.0),
                coord(rng, h / 2.0)
            )),
            2 => body.push_str(&format!(
                r#"<circle cx="{}" cy="{}" r="{}" fill="{fill}" stroke="black" stroke-width="{}"/>"#,
                coord(rng, w),
                coord(rng, h),
                rng.gen_range(1.0..w / 3.0),
                rng.gen_range(1..4)
            )),
            _ => body.push_str(&format!(
                r#"<polygon points="{} {} {} {} {} {}" fill="{fill}"/>"#,
                coord(rng, w),
                coord(rng, h),
                coord(rng, w),
                coord(rng, h),
                coord(rng, w),
                coord(rng, h)
            )),
        }
    }
    format!(r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {w} {h}">{body}</svg>"#)
}
