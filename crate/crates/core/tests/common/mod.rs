#![allow(dead_code)]

use rand::Rng;
use revolve::calculus::PatternSpec;
use revolve::emit::PatternDoc;
use revolve::shaping::ShapingOp;

pub const RUNNING_FUNCTION: &str = "x^3 + 2*x^2 - 2*x + 4";

pub fn running_spec() -> PatternSpec {
    PatternSpec::new(RUNNING_FUNCTION, -3.0, 1.0, 22, 25, 0.18).unwrap()
}

pub fn m1() -> f64 {
    (-2.0 - 10f64.sqrt()) / 3.0
}

pub fn m2() -> f64 {
    (-2.0 + 10f64.sqrt()) / 3.0
}

/// Random expression text over every supported operator, built so the
/// result is defined and of moderate size on [-2, 2].
pub fn random_expression<R: Rng>(rng: &mut R, depth: u32) -> String {
    if depth == 0 || rng.gen_bool(0.2) {
        return match rng.gen_range(0..4) {
            0 => "x".to_string(),
            1 => format!("{:.3}", rng.gen_range(-3.0..3.0)),
            2 => "pi".to_string(),
            _ => format!("{:.2}*x", rng.gen_range(-2.0..2.0)),
        };
    }
    let u = random_expression(rng, depth - 1);
    let v = random_expression(rng, depth - 1);
    match rng.gen_range(0..14) {
        0 => format!("({u}) + ({v})"),
        1 => format!("({u}) - ({v})"),
        2 => format!("({u}) * ({v})"),
        3 => format!("({u}) / (2 + cos({v}))"),
        4 => format!("({u})^{}", rng.gen_range(2..4)),
        5 => format!("sin({u})"),
        6 => format!("cos({u})"),
        7 => format!("tan(sin({u}) / 2)"),
        8 => format!("exp(sin({u}))"),
        9 => format!("ln(2 + sin({u}))"),
        10 => format!("sqrt(1 + ({u})^2)"),
        11 => format!("abs(sin({u}) + 1.5)"),
        12 => format!("(1.5 + sin({u}))^(cos({v}))"),
        _ => format!("-({u}) + e"),
    }
}

/// Random valid pattern input: a polynomial or trigonometric sum lifted
/// so every row has a comfortable number of stitches.
pub fn random_spec<R: Rng>(rng: &mut R) -> PatternSpec {
    let a: f64 = (rng.gen_range(-30..=20) as f64) / 10.0;
    let b = a + (rng.gen_range(5..=30) as f64) / 10.0;
    let stitch_gauge = rng.gen_range(12..=30);
    let row_gauge = rng.gen_range(12..=30);
    let scale: f64 = (rng.gen_range(10..=60) as f64) / 100.0;

    let mut terms = Vec::new();
    for _ in 0..rng.gen_range(1..=3) {
        let c = rng.gen_range(-1.0..1.0);
        terms.push(match rng.gen_range(0..5) {
            0 => format!("{c:.3}*x"),
            1 => format!("{c:.3}*x^2"),
            2 => format!("{:.3}*x^3", c / 3.0),
            3 => format!("{c:.3}*sin({:.2}*x)", rng.gen_range(0.5..3.0)),
            _ => format!("{c:.3}*cos({:.2}*x)", rng.gen_range(0.5..3.0)),
        });
    }
    let body = terms.join(" + ");
    let probe = revolve::Expr::parse(&body).unwrap();
    let lowest = (0..=2048)
        .map(|i| probe.eval(a + (b - a) * i as f64 / 2048.0).unwrap())
        .fold(f64::INFINITY, f64::min);
    // at least ~8 stitches in the narrowest row
    let floor = 8.0 / (2.0 * std::f64::consts::PI * scale * stitch_gauge as f64 / 4.0);
    let lift = floor - lowest + rng.gen_range(0.0..1.5);
    let text = format!("{lift:.4} + {body}");
    PatternSpec::new(&text, a, b, stitch_gauge, row_gauge, scale)
        .unwrap_or_else(|e| panic!("{text} on [{a}, {b}]: {e}"))
}

/// Expands an instruction into single stitch tokens (`Sc`, `Inc`, `Dec`).
/// Written independently of the library's own parser.
pub fn expand_tokens(instruction: &str) -> Option<Vec<&'static str>> {
    let body = instruction.split(". (").next()?.trim_end_matches('.');
    let mut out = Vec::new();
    let mut rest = body;
    while !rest.is_empty() {
        rest = rest.trim_start_matches([',', ' ']);
        if rest.is_empty() {
            break;
        }
        if let Some(inner) = rest.strip_prefix('*') {
            let close = inner.find('*')?;
            let group = expand_tokens(&format!("{}.", &inner[..close]))?;
            let after = &inner[close + 1..];
            let open = after.find('(')?;
            let shut = after.find(')')?;
            let n: usize = after[open + 1..shut].split(' ').next()?.parse().ok()?;
            for _ in 0..n {
                out.extend(group.iter().copied());
            }
            rest = &after[shut + 1..];
            continue;
        }
        let end = rest.find(',').unwrap_or(rest.len());
        let token = rest[..end].trim();
        match token {
            "Inc" => out.push("Inc"),
            "Dec" => out.push("Dec"),
            t => {
                let n: usize = t.strip_prefix("Sc")?.parse().ok()?;
                out.extend(std::iter::repeat_n("Sc", n));
            }
        }
        rest = &rest[end..];
    }
    Some(out)
}

/// (consumed, produced) from expanded tokens.
pub fn token_totals(tokens: &[&str]) -> (u32, u32) {
    tokens.iter().fold((0, 0), |(c, p), t| match *t {
        "Inc" => (c + 1, p + 2),
        "Dec" => (c + 2, p + 1),
        _ => (c + 1, p + 1),
    })
}

/// Rows whose instruction is a real stitch layout (not the foundation,
/// not a steep-change placeholder), with the previous row's count.
pub fn worked_rows(doc: &PatternDoc) -> Vec<(u32, &revolve::emit::RowRecord)> {
    doc.rows
        .windows(2)
        .filter(|w| !(w[1].steep && w[1].op != ShapingOp::None))
        .map(|w| (w[0].stitches, &w[1]))
        .collect()
}
