//! Seeded procedural icons used by the offline backends and synthetic corpora.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use crate::geom::Point;
use crate::normalize::CANONICAL_SIDE;
use crate::svg::{ArcSegment, PathCommand, PathStyle, Rgba, SvgDocument, SvgPath, ViewBox};

pub const PALETTE: [Rgba; 8] = [
    Rgba::opaque(0xe6, 0x39, 0x46),
    Rgba::opaque(0xf4, 0xa2, 0x61),
    Rgba::opaque(0xe9, 0xc4, 0x6a),
    Rgba::opaque(0x2a, 0x9d, 0x8f),
    Rgba::opaque(0x26, 0x46, 0x53),
    Rgba::opaque(0x45, 0x7b, 0x9d),
    Rgba::opaque(0x6a, 0x4c, 0x93),
    Rgba::opaque(0x1d, 0x1d, 0x1d),
];

/// Deterministic generator keyed by the SHA-256 of length-prefixed parts.
pub fn keyed_rng(parts: &[&[u8]]) -> ChaCha8Rng {
    let mut h = Sha256::new();
    for part in parts {
        h.update((part.len() as u64).to_le_bytes());
        h.update(part);
    }
    ChaCha8Rng::from_seed(h.finalize().into())
}

fn p(x: i32, y: i32) -> Point {
    Point::new(x as f64, y as f64)
}

/// One filled shape with integer coordinates inside the canonical viewbox.
pub fn random_shape(rng: &mut impl Rng) -> SvgPath {
    let s = rng.gen_range(12..=45);
    let cx = rng.gen_range(s + 5..=195 - s);
    let cy = rng.gen_range(s + 5..=195 - s);
    let color = PALETTE[rng.gen_range(0..PALETTE.len())];
    use PathCommand::*;
    let commands = match rng.gen_range(0..5) {
        0 => vec![
            MoveTo(p(cx - s, cy - s)),
            LineTo(p(cx + s, cy - s)),
            LineTo(p(cx + s, cy + s)),
            LineTo(p(cx - s, cy + s)),
            Close,
        ],
        1 => vec![MoveTo(p(cx, cy - s)), LineTo(p(cx + s, cy + s)), LineTo(p(cx - s, cy + s)), Close],
        2 => {
            let arc = |to| ArcTo(ArcSegment { rx: s as f64, ry: s as f64, x_rotation: 0.0, large_arc: false, sweep: true, to });
            vec![MoveTo(p(cx + s, cy)), arc(p(cx - s, cy)), arc(p(cx + s, cy)), Close]
        }
        3 => vec![
            MoveTo(p(cx - s, cy)),
            CubicTo { ctrl1: p(cx - s, cy - s), ctrl2: p(cx + s, cy - s), to: p(cx + s, cy) },
            CubicTo { ctrl1: p(cx + s, cy + s), ctrl2: p(cx - s, cy + s), to: p(cx - s, cy) },
            Close,
        ],
        _ => vec![
            MoveTo(p(cx - s, cy)),
            QuadTo { ctrl: p(cx, cy - s), to: p(cx + s, cy) },
            QuadTo { ctrl: p(cx, cy + s), to: p(cx - s, cy) },
            Close,
        ],
    };
    SvgPath::new(commands, PathStyle::filled(color)).expect("procedural shapes are well formed")
}

/// A canonical-viewbox document of `paths` random shapes.
pub fn random_document(rng: &mut impl Rng, paths: usize) -> SvgDocument {
    let shapes = (0..paths).map(|_| random_shape(rng)).collect();
    SvgDocument::new(ViewBox::square(CANONICAL_SIDE), shapes).expect("canonical viewbox")
}
