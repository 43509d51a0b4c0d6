mod common;

use proptest::prelude::*;
use rand::Rng;
use svgpipe_core::geom::Point;
use svgpipe_core::normalize::{normalize, quantize_coords, rescale_viewbox};
use svgpipe_core::raster::arc::{endpoint_to_center, ArcShape};
use svgpipe_core::raster::render;
use svgpipe_core::svg::{
    parse_path_data, parse_svg, serialize_svg, ArcSegment, ParseMode, PathCommand, PathStyle, Rgba, SvgDocument,
    SvgPath, ViewBox,
};
use svgpipe_core::synth::keyed_rng;

use common::{mean_abs_diff, random_svg_markup};

fn canonical_letters_only(text: &str) -> bool {
    text.split("d=\"").skip(1).all(|rest| {
        let d = &rest[..rest.find('"').unwrap()];
        d.chars().filter(|c| c.is_ascii_alphabetic()).all(|c| "MLCQAZ".contains(c))
    })
}

#[test]
fn markup_generator_mostly_parses() {
    let mut rng = keyed_rng(&[b"gen"]);
    let ok = (0..200)
        .filter(|_| parse_svg(&random_svg_markup(&mut rng), ParseMode::Lenient).is_ok())
        .count();
    assert!(ok >= 190, "{ok}");
}

fn coord() -> impl Strategy<Value = f64> {
    (0i64..=20_000).prop_map(|v| v as f64 / 100.0)
}

fn point() -> impl Strategy<Value = Point> {
    (coord(), coord()).prop_map(|(x, y)| Point::new(x, y))
}

fn command() -> impl Strategy<Value = PathCommand> {
    prop_oneof![
        point().prop_map(PathCommand::LineTo),
        (point(), point(), point()).prop_map(|(a, b, c)| PathCommand::CubicTo { ctrl1: a, ctrl2: b, to: c }),
        (point(), point()).prop_map(|(a, b)| PathCommand::QuadTo { ctrl: a, to: b }),
        (1i64..=10_000, 1i64..=10_000, 0i64..360, any::<bool>(), any::<bool>(), point()).prop_map(
            |(rx, ry, rot, large_arc, sweep, to)| PathCommand::ArcTo(ArcSegment {
                rx: rx as f64 / 100.0,
                ry: ry as f64 / 100.0,
                x_rotation: rot as f64,
                large_arc,
                sweep,
                to,
            })
        ),
    ]
}

fn style() -> impl Strategy<Value = PathStyle> {
    (any::<[u8; 3]>(), 0u8..=100, prop::option::of((any::<[u8; 3]>(), 1i64..=2000))).prop_map(|(c, a, stroke)| {
        let mut s = PathStyle::filled(Rgba::opaque(c[0], c[1], c[2]).with_alpha(a as f64 / 100.0));
        if let Some((sc, w)) = stroke {
            s.stroke = Some(Rgba::opaque(sc[0], sc[1], sc[2]));
            s.stroke_width = w as f64 / 100.0;
        }
        s
    })
}

prop_compose! {
    fn canonical_path()(start in point(), body in prop::collection::vec(command(), 1..8), close in any::<bool>(), style in style()) -> SvgPath {
        let mut commands = vec![PathCommand::MoveTo(start)];
        commands.extend(body);
        if close {
            commands.push(PathCommand::Close);
        }
        SvgPath::new(commands, style).unwrap()
    }
}

prop_compose! {
    fn canonical_document()(paths in prop::collection::vec(canonical_path(), 0..6)) -> SvgDocument {
        SvgDocument::new(ViewBox::square(200.0), paths).unwrap()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn parse_serialize_identity(doc in canonical_document()) {
        let text = serialize_svg(&doc);
        prop_assert_eq!(parse_svg(&text, ParseMode::Strict).unwrap(), doc);
    }

    #[test]
    fn normalize_idempotent_on_generated_documents(doc in canonical_document()) {
        let once = normalize(&doc);
        prop_assert_eq!(normalize(&once), once.clone());
        prop_assert_eq!(parse_svg(&serialize_svg(&once), ParseMode::Strict).unwrap(), once);
    }

    #[test]
    fn normalize_idempotent_on_markup(seed in any::<u64>()) {
        let markup = random_svg_markup(&mut keyed_rng(&[b"idem", &seed.to_le_bytes()]));
        if let Ok(doc) = parse_svg(&markup, ParseMode::Lenient) {
            let once = normalize(&doc);
            let text = serialize_svg(&once);
            prop_assert!(canonical_letters_only(&text), "{}", text);
            prop_assert!(text.contains(r#"viewBox="0 0 200 200""#));
            prop_assert_eq!(normalize(&once), once.clone());
            prop_assert_eq!(parse_svg(&text, ParseMode::Strict).unwrap(), once);
        }
    }
}

/// Point at parameter `t ∈ [0,1]` of command `cmd` starting at `from`.
fn eval(cmd: &PathCommand, from: Point, start: Point, t: f64) -> Point {
    let bez = |pts: &[Point]| {
        let mut v = pts.to_vec();
        while v.len() > 1 {
            v = v.windows(2).map(|w| w[0].lerp(w[1], t)).collect();
        }
        v[0]
    };
    match *cmd {
        PathCommand::MoveTo(p) => p,
        PathCommand::LineTo(p) => from.lerp(p, t),
        PathCommand::CubicTo { ctrl1, ctrl2, to } => bez(&[from, ctrl1, ctrl2, to]),
        PathCommand::QuadTo { ctrl, to } => bez(&[from, ctrl, to]),
        PathCommand::ArcTo(arc) => match endpoint_to_center(from, &arc) {
            ArcShape::Omitted => from,
            ArcShape::Line => from.lerp(arc.to, t),
            ArcShape::Elliptic(c) => c.point_at(c.start_angle + t * c.sweep_angle),
        },
        PathCommand::Close => from.lerp(start, t),
    }
}

fn bez_at(c: &[Point; 4], t: f64) -> Point {
    let mut v = c.to_vec();
    while v.len() > 1 {
        v = v.windows(2).map(|w| w[0].lerp(w[1], t)).collect();
    }
    v[0]
}

fn sample_path(path: &SvgPath, n: usize) -> Vec<Point> {
    let cmds = path.commands();
    let mut starts = Vec::with_capacity(cmds.len());
    let (mut cur, mut sub) = (Point::ORIGIN, Point::ORIGIN);
    for c in cmds {
        starts.push((cur, sub));
        match c {
            PathCommand::MoveTo(p) => {
                cur = *p;
                sub = *p;
            }
            PathCommand::Close => cur = sub,
            other => cur = other.end_point().unwrap(),
        }
    }
    (0..n)
        .map(|k| {
            let s = k as f64 / (n - 1) as f64 * cmds.len() as f64;
            let i = (s.floor() as usize).min(cmds.len() - 1);
            let (from, start) = starts[i];
            eval(&cmds[i], from, start, (s - i as f64).min(1.0))
        })
        .collect()
}

#[test]
fn quantization_moves_curves_at_most_one_unit() {
    let mut rng = keyed_rng(&[b"fidelity"]);
    let mut worst: f64 = 0.0;
    let mut checked = 0;
    while checked < 300 {
        let Ok(doc) = parse_svg(&random_svg_markup(&mut rng), ParseMode::Lenient) else { continue };
        let before = rescale_viewbox(&doc, 200.0);
        let after = quantize_coords(&before);
        for (b, a) in before.paths().iter().zip(after.paths()) {
            for (p, q) in sample_path(b, 1000).iter().zip(sample_path(a, 1000)) {
                worst = worst.max(p.distance(q));
            }
        }
        checked += 1;
    }
    assert!(worst <= 1.0, "max displacement {worst}");
}

#[test]
fn lowered_shorthand_matches_reference_flattening() {
    let mut rng = keyed_rng(&[b"shorthand"]);
    for case in 0..60 {
        let d = random_shorthand_data(&mut rng);
        let svg = format!(r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 200 200"><path d="{d}"/></svg>"#);
        let lowered = parse_svg(&svg, ParseMode::Lenient).unwrap();
        let reference = reference_document(&d);
        let diff = mean_abs_diff(&render(&lowered, 64), &render(&reference, 64));
        assert!(diff <= 1.0 / 255.0, "case {case}: {diff} for {d}");
    }
}

fn random_shorthand_data(rng: &mut impl Rng) -> String {
    let c = |rng: &mut dyn rand::RngCore| format!("{:.1}", rng.gen_range(20.0..180.0));
    let r = |rng: &mut dyn rand::RngCore| format!("{:.1}", rng.gen_range(-30.0..30.0));
    let mut d = format!("M {} {}", c(rng), c(rng));
    for _ in 0..rng.gen_range(3..10) {
        let seg = match rng.gen_range(0..12) {
            0 => format!(" H {}", c(rng)),
            1 => format!(" h {} {}", r(rng), r(rng)),
            2 => format!(" V {}", c(rng)),
            3 => format!(" v {}", r(rng)),
            4 => format!(" S {} {} {} {}", c(rng), c(rng), c(rng), c(rng)),
            5 => format!(" s {} {} {} {} {} {} {} {}", r(rng), r(rng), r(rng), r(rng), r(rng), r(rng), r(rng), r(rng)),
            6 => format!(" T {} {}", c(rng), c(rng)),
            7 => format!(" t {} {} {} {}", r(rng), r(rng), r(rng), r(rng)),
            8 => format!(" c {} {} {} {} {} {}", r(rng), r(rng), r(rng), r(rng), r(rng), r(rng)),
            9 => format!(" q {} {} {} {}", r(rng), r(rng), r(rng), r(rng)),
            10 => format!(" l {} {} {} {}", r(rng), r(rng), r(rng), r(rng)),
            _ => format!(" z m {} {}", r(rng), r(rng)),
        };
        d.push_str(&seg);
    }
    d.push_str(" z");
    d
}

/// Independent interpretation of raw path data: every curve sampled at 256
/// uniform parameter steps, emitted as straight lines.
fn reference_document(d: &str) -> SvgDocument {
    const STEPS: usize = 256;
    let raw = parse_path_data(d).unwrap();
    let mut subpaths: Vec<Vec<Point>> = Vec::new();
    let (mut cur, mut start) = (Point::ORIGIN, Point::ORIGIN);
    let mut last_c: Option<Point> = None;
    let mut last_q: Option<Point> = None;
    let cubic = |p0: Point, p1: Point, p2: Point, p3: Point, out: &mut Vec<Point>| {
        for k in 1..=STEPS {
            out.push(bez_at(&[p0, p1, p2, p3], k as f64 / STEPS as f64));
        }
    };
    let quad = |p0: Point, p1: Point, p2: Point, out: &mut Vec<Point>| {
        for k in 1..=STEPS {
            let t = k as f64 / STEPS as f64;
            let u = 1.0 - t;
            out.push(Point::new(
                u * u * p0.x + 2.0 * u * t * p1.x + t * t * p2.x,
                u * u * p0.y + 2.0 * u * t * p1.y + t * t * p2.y,
            ));
        }
    };
    for cmd in &raw {
        let rel = cmd.letter.is_ascii_lowercase();
        let n = svgpipe_core::svg::arity(cmd.letter).unwrap();
        let groups: Vec<&[f64]> = if n == 0 { vec![&[][..]] } else { cmd.args.chunks(n).collect() };
        for (gi, g) in groups.into_iter().enumerate() {
            let base = if rel { cur } else { Point::ORIGIN };
            let abs = |x: f64, y: f64| Point::new(base.x + x, base.y + y);
            let mut letter = cmd.letter.to_ascii_uppercase();
            if letter == 'M' && gi > 0 {
                letter = 'L';
            }
            let mut next_c = None;
            let mut next_q = None;
            match letter {
                'M' => {
                    cur = abs(g[0], g[1]);
                    start = cur;
                    subpaths.push(vec![cur]);
                }
                'L' => {
                    cur = abs(g[0], g[1]);
                    subpaths.last_mut().unwrap().push(cur);
                }
                'H' => {
                    cur = Point::new(if rel { cur.x + g[0] } else { g[0] }, cur.y);
                    subpaths.last_mut().unwrap().push(cur);
                }
                'V' => {
                    cur = Point::new(cur.x, if rel { cur.y + g[0] } else { g[0] });
                    subpaths.last_mut().unwrap().push(cur);
                }
                'C' | 'S' => {
                    let (c1, c2, to) = if letter == 'C' {
                        (abs(g[0], g[1]), abs(g[2], g[3]), abs(g[4], g[5]))
                    } else {
                        let c1 = match last_c {
                            Some(p) => Point::new(2.0 * cur.x - p.x, 2.0 * cur.y - p.y),
                            None => cur,
                        };
                        (c1, abs(g[0], g[1]), abs(g[2], g[3]))
                    };
                    cubic(cur, c1, c2, to, subpaths.last_mut().unwrap());
                    next_c = Some(c2);
                    cur = to;
                }
                'Q' | 'T' => {
                    let (c, to) = if letter == 'Q' {
                        (abs(g[0], g[1]), abs(g[2], g[3]))
                    } else {
                        let c = match last_q {
                            Some(p) => Point::new(2.0 * cur.x - p.x, 2.0 * cur.y - p.y),
                            None => cur,
                        };
                        (c, abs(g[0], g[1]))
                    };
                    quad(cur, c, to, subpaths.last_mut().unwrap());
                    next_q = Some(c);
                    cur = to;
                }
                'Z' => {
                    cur = start;
                    // a drawing command after z starts a new subpath at the old start
                    subpaths.push(vec![cur]);
                }
                other => panic!("unexpected {other}"),
            }
            last_c = next_c;
            last_q = next_q;
        }
    }
    let mut commands = Vec::new();
    for sp in subpaths.iter().filter(|s| s.len() > 1) {
        commands.push(PathCommand::MoveTo(sp[0]));
        commands.extend(sp[1..].iter().map(|&p| PathCommand::LineTo(p)));
        commands.push(PathCommand::Close);
    }
    let path = SvgPath::new(commands, PathStyle::filled(Rgba::BLACK)).unwrap();
    SvgDocument::new(ViewBox::square(200.0), vec![path]).unwrap()
}
