use super::document::Rgba;

/// A parsed paint value.
#[derive(Clone, Debug, PartialEq)]
pub enum Paint {
    None,
    Color(Rgba),
    /// `url(#id)` reference.
    Reference(String),
}

const NAMED: &[(&str, (u8, u8, u8))] = &[
    ("black", (0, 0, 0)),
    ("white", (255, 255, 255)),
    ("red", (255, 0, 0)),
    ("green", (0, 128, 0)),
    ("lime", (0, 255, 0)),
    ("blue", (0, 0, 255)),
    ("yellow", (255, 255, 0)),
    ("cyan", (0, 255, 255)),
    ("aqua", (0, 255, 255)),
    ("magenta", (255, 0, 255)),
    ("fuchsia", (255, 0, 255)),
    ("gray", (128, 128, 128)),
    ("grey", (128, 128, 128)),
    ("silver", (192, 192, 192)),
    ("maroon", (128, 0, 0)),
    ("olive", (128, 128, 0)),
    ("navy", (0, 0, 128)),
    ("purple", (128, 0, 128)),
    ("teal", (0, 128, 128)),
    ("orange", (255, 165, 0)),
    ("brown", (165, 42, 42)),
    ("pink", (255, 192, 203)),
    ("gold", (255, 215, 0)),
    ("darkgray", (169, 169, 169)),
    ("lightgray", (211, 211, 211)),
];

fn hex_nibble(c: u8) -> Option<u8> {
    (c as char).to_digit(16).map(|d| d as u8)
}

fn parse_hex(hex: &str) -> Option<Rgba> {
    let b = hex.as_bytes();
    match b.len() {
        3 => {
            let r = hex_nibble(b[0])?;
            let g = hex_nibble(b[1])?;
            let bl = hex_nibble(b[2])?;
            Some(Rgba::opaque(r * 17, g * 17, bl * 17))
        }
        6 => {
            let byte = |i: usize| Some(hex_nibble(b[i])? * 16 + hex_nibble(b[i + 1])?);
            Some(Rgba::opaque(byte(0)?, byte(2)?, byte(4)?))
        }
        _ => None,
    }
}

fn parse_rgb_function(body: &str) -> Option<Rgba> {
    let parts: Vec<&str> = body.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return None;
    }
    let mut channels = [0u8; 3];
    for (slot, part) in channels.iter_mut().zip(&parts) {
        let value = if let Some(pct) = part.strip_suffix('%') {
            pct.trim().parse::<f64>().ok()? * 2.55
        } else {
            part.parse::<f64>().ok()?
        };
        *slot = value.round().clamp(0.0, 255.0) as u8;
    }
    Some(Rgba::opaque(channels[0], channels[1], channels[2]))
}

/// Parses a fill/stroke value. Returns `None` for unrecognized syntax.
pub fn parse_paint(value: &str) -> Option<Paint> {
    let v = value.trim();
    if v.eq_ignore_ascii_case("none") || v.eq_ignore_ascii_case("transparent") {
        return Some(Paint::None);
    }
    if let Some(rest) = v.strip_prefix("url(") {
        let inner = rest.split(')').next()?.trim().trim_matches(|c| c == '\'' || c == '"');
        return Some(Paint::Reference(inner.trim_start_matches('#').to_string()));
    }
    parse_color(v).map(Paint::Color)
}

pub fn parse_color(value: &str) -> Option<Rgba> {
    let v = value.trim();
    if let Some(hex) = v.strip_prefix('#') {
        return parse_hex(hex);
    }
    let lower = v.to_ascii_lowercase();
    if let Some(body) = lower.strip_prefix("rgb(").and_then(|b| b.strip_suffix(')')) {
        return parse_rgb_function(body);
    }
    if lower == "currentcolor" {
        return Some(Rgba::BLACK);
    }
    NAMED
        .iter()
        .find(|(name, _)| *name == lower)
        .map(|(_, (r, g, b))| Rgba::opaque(*r, *g, *b))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hex_forms() {
        assert_eq!(parse_color("#f00"), Some(Rgba::opaque(255, 0, 0)));
        assert_eq!(parse_color("#1a2B3c"), Some(Rgba::opaque(0x1a, 0x2b, 0x3c)));
        assert_eq!(parse_color("#12"), None);
    }

    #[test]
    fn functional_and_named() {
        assert_eq!(parse_color("rgb(10, 20, 30)"), Some(Rgba::opaque(10, 20, 30)));
        assert_eq!(parse_color("rgb(100%,0%,0%)"), Some(Rgba::opaque(255, 0, 0)));
        assert_eq!(parse_color("Orange"), Some(Rgba::opaque(255, 165, 0)));
    }

    #[test]
    fn paint_references() {
        assert_eq!(parse_paint("url(#grad1)"), Some(Paint::Reference("grad1".into())));
        assert_eq!(parse_paint("none"), Some(Paint::None));
    }
}
