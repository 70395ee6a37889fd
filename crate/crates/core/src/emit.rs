//! Pattern assembly and output: plain text, JSON and SVG.
//!
//! Row instructions use the spiral-round dialect:
//!
//! ```text
//! Row 0: Chain 6. join work, and Sc6.
//! Row 1:  *Inc* (6 times). (12 stitches)
//! Row 2:  Inc, *Sc1, Inc* (5 times), Sc1. (18 stitches)
//! Tie off
//! ```
//!
//! `*...* (N times)` repeats the starred group. `Inc` works two stitches
//! into one, `Dec` works two stitches together.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::calculus::{build_plan, CalcError, LandmarkPlan, PatternSpec, Segment};
use crate::expr::DomainError;
use crate::shaping::{row_counts, shape_rows, RowShaping, ShapingOp};

pub const SCHEMA_VERSION: u32 = 1;

pub const OPEN_FINISH: &str = "Tie off";
pub const CLOSED_FINISH: &str = "Dec to close; tie off and weave in end.";
pub const STUFFING: &str = "Stuff the shape with fiberfill before closing.";

const SVG_WIDTH: f64 = 640.0;
const SVG_HEIGHT: f64 = 400.0;
const SVG_SAMPLES: usize = 512;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PatternError {
    #[error(transparent)]
    Calc(#[from] CalcError),
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error("every row rounds to zero stitches; increase the scale or the function")]
    NoStitches,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RowRecord {
    pub index: usize,
    pub x: f64,
    pub stitches: u32,
    pub op: ShapingOp,
    pub n_ops: u32,
    pub q: u32,
    pub r: u32,
    pub k: u32,
    pub positions: Vec<u32>,
    pub steep: bool,
    pub instruction: String,
}

/// A finished pattern, ready for any output format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatternDoc {
    pub schema_version: u32,
    pub function: String,
    pub a: f64,
    pub b: f64,
    pub stitch_gauge: u32,
    pub row_gauge: u32,
    pub scale: f64,
    pub prioritize_extrema: bool,
    pub segments: Vec<Segment>,
    pub landmarks: Vec<f64>,
    pub warnings: Vec<String>,
    pub closed_start: bool,
    pub closed_end: bool,
    pub stuffed: bool,
    /// `rows[0]` is the foundation row (chain or magic ring).
    pub rows: Vec<RowRecord>,
}

/// Stitch counts for every landmark, shaped, with zero-stitch rows at a
/// root endpoint dropped (the magic ring or the closing takes their place).
pub fn shape_plan(
    spec: &PatternSpec,
    plan: &LandmarkPlan,
) -> Result<Vec<RowShaping>, PatternError> {
    let counts = row_counts(spec, &plan.landmarks)?;
    let first = counts
        .iter()
        .position(|&s| s > 0)
        .ok_or(PatternError::NoStitches)?;
    let last = counts
        .iter()
        .rposition(|&s| s > 0)
        .expect("a nonzero row exists");
    let rows: Vec<(usize, f64, u32)> = (first..=last)
        .map(|i| (i, plan.landmarks[i], counts[i]))
        .collect();
    Ok(shape_rows(&rows))
}

/// Runs the full pipeline.
pub fn generate(spec: &PatternSpec, prioritize_extrema: bool) -> Result<PatternDoc, PatternError> {
    let plan = build_plan(spec, prioritize_extrema)?;
    let rows = shape_plan(spec, &plan)?;
    Ok(render_pattern(spec, &plan, &rows, prioritize_extrema))
}

fn shaping_op_name(op: ShapingOp) -> &'static str {
    match op {
        ShapingOp::Increase => "Inc",
        ShapingOp::Decrease => "Dec",
        ShapingOp::None => "Sc",
    }
}

/// Instruction text for one shaped row, without the `Row N:` prefix.
pub fn render_row(row: &RowShaping) -> String {
    let total = format!("({} stitches)", row.stitches);
    if row.op == ShapingOp::None {
        return format!("Sc{}. {total}", row.stitches);
    }
    if row.positions.is_empty() {
        return format!(
            "Adjust inputs: going from {} to {} stitches needs more than one {} per stitch. {total}",
            row.prev_stitches,
            row.stitches,
            shaping_op_name(row.op)
        );
    }

    let op = shaping_op_name(row.op);
    let (q, k, n) = (row.q, row.k, row.n_ops);
    let tail = row.instructions() - (q * (n - 1) + k);
    let sc = |count: u32| (count > 0).then(|| format!("Sc{count}"));
    let group = match sc(q - 1) {
        Some(plain) => format!("*{plain}, {op}*"),
        None => format!("*{op}*"),
    };

    let parts: Vec<String> = if n > 1 && k == q && tail == 0 {
        vec![format!("{group} ({n} times)")]
    } else {
        let mut parts = Vec::new();
        parts.extend(sc(k - 1));
        parts.push(op.to_string());
        match n {
            1 => {}
            // a group worked once is written out without stars
            2 => {
                parts.extend(sc(q - 1));
                parts.push(op.to_string());
            }
            _ => parts.push(format!("{group} ({} times)", n - 1)),
        }
        parts.extend(sc(tail));
        parts
    };
    format!("{}. {total}", parts.join(", "))
}

fn foundation(row: &RowShaping, closed_start: bool) -> String {
    let n = row.stitches;
    if closed_start {
        format!("Create a magic ring with {n} stitches.")
    } else {
        format!("Chain {n}. join work, and Sc{n}.")
    }
}

fn steep_warning(row: &RowShaping) -> String {
    let verb = if row.op == ShapingOp::Increase {
        "more than doubles"
    } else {
        "more than halves"
    };
    format!(
        "Warning: Row {} {verb} the stitch count ({} to {}), which single Inc/Dec stitches cannot do. \
         Try adding a positive constant to the function.",
        row.index, row.prev_stitches, row.stitches
    )
}

/// Assembles the pattern document from shaped rows.
pub fn render_pattern(
    spec: &PatternSpec,
    plan: &LandmarkPlan,
    rows: &[RowShaping],
    prioritize_extrema: bool,
) -> PatternDoc {
    let closed_start = rows.first().is_some_and(|r| r.index > 0);
    let closed_end = rows
        .last()
        .is_some_and(|r| r.index + 1 < plan.landmarks.len());

    let warnings = rows
        .iter()
        .skip(1)
        .filter(|r| r.steep)
        .map(steep_warning)
        .collect();
    let records = rows
        .iter()
        .enumerate()
        .map(|(i, row)| RowRecord {
            index: row.index,
            x: row.x,
            stitches: row.stitches,
            op: row.op,
            n_ops: row.n_ops,
            q: row.q,
            r: row.r,
            k: row.k,
            positions: row.positions.clone(),
            steep: row.steep,
            instruction: if i == 0 {
                foundation(row, closed_start)
            } else {
                render_row(row)
            },
        })
        .collect();

    PatternDoc {
        schema_version: SCHEMA_VERSION,
        function: spec.function().to_string(),
        a: spec.a(),
        b: spec.b(),
        stitch_gauge: spec.stitch_gauge(),
        row_gauge: spec.row_gauge(),
        scale: spec.scale(),
        prioritize_extrema,
        segments: plan.segments.clone(),
        landmarks: plan.landmarks.clone(),
        warnings,
        closed_start,
        closed_end,
        stuffed: closed_start && closed_end,
        rows: records,
    }
}

/// Plain-text pattern, LF line endings.
pub fn render_text(doc: &PatternDoc) -> String {
    let mut out = String::new();
    for warning in &doc.warnings {
        out.push_str(warning);
        out.push('\n');
    }
    if !doc.warnings.is_empty() {
        out.push('\n');
    }
    for (i, row) in doc.rows.iter().enumerate() {
        let gap = if i == 0 { " " } else { "  " };
        let _ = writeln!(out, "Row {}:{gap}{}", row.index, row.instruction);
    }
    if doc.stuffed {
        out.push_str(STUFFING);
        out.push('\n');
    }
    out.push_str(if doc.closed_end {
        CLOSED_FINISH
    } else {
        OPEN_FINISH
    });
    out.push('\n');
    out
}

pub fn render_json(doc: &PatternDoc) -> String {
    let mut text = serde_json::to_string_pretty(doc).expect("pattern documents always serialize");
    text.push('\n');
    text
}

pub fn parse_json(text: &str) -> Result<PatternDoc, serde_json::Error> {
    serde_json::from_str(text)
}

/// Stitches consumed from the previous row and produced by one rendered
/// instruction, or `None` if the text is not in the instruction dialect.
pub fn instruction_totals(instruction: &str) -> Option<(u32, u32)> {
    let body = match instruction.rfind(". (") {
        Some(i) => &instruction[..i],
        None => instruction.strip_suffix('.')?,
    };
    let mut consumed = 0;
    let mut produced = 0;
    let mut rest = body.trim();
    while !rest.is_empty() {
        let (token, remainder) = if let Some(group) = rest.strip_prefix('*') {
            let close = group.find('*')?;
            let inner = &group[..close];
            let after = group[close + 1..].trim_start();
            let after = after.strip_prefix('(')?;
            let end = after.find(')')?;
            let count: u32 = after[..end].strip_suffix(" times")?.parse().ok()?;
            let (c, p) = instruction_totals(&format!("{inner}."))?;
            consumed += c * count;
            produced += p * count;
            ("", &after[end + 1..])
        } else {
            match rest.find(',') {
                Some(i) => (&rest[..i], &rest[i..]),
                None => (rest, ""),
            }
        };
        match token.trim() {
            "" => {}
            "Inc" => {
                consumed += 1;
                produced += 2;
            }
            "Dec" => {
                consumed += 2;
                produced += 1;
            }
            t => {
                let n: u32 = t.strip_prefix("Sc")?.parse().ok()?;
                consumed += n;
                produced += n;
            }
        }
        rest = remainder
            .trim_start()
            .strip_prefix(',')
            .unwrap_or(remainder)
            .trim();
    }
    Some((consumed, produced))
}

/// Plot of `f` over `[a, b]` with one marker per landmark.
pub fn render_svg(spec: &PatternSpec, plan: &LandmarkPlan) -> Result<String, DomainError> {
    let f = spec.f();
    let (a, b) = (spec.a(), spec.b());
    let samples = (0..SVG_SAMPLES)
        .map(|i| {
            let x = if i + 1 == SVG_SAMPLES {
                b
            } else {
                a + (b - a) * i as f64 / (SVG_SAMPLES - 1) as f64
            };
            f.eval(x).map(|y| (x, y))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let markers = plan
        .landmarks
        .iter()
        .map(|&x| f.eval(x).map(|y| (x, y)))
        .collect::<Result<Vec<_>, _>>()?;

    let (mut y_lo, mut y_hi) = samples
        .iter()
        .chain(&markers)
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &(_, y)| {
            (lo.min(y), hi.max(y))
        });
    if y_hi - y_lo <= f64::EPSILON * y_hi.abs().max(1.0) {
        y_lo -= 0.5;
        y_hi += 0.5;
    }
    let pad_x = 0.05 * (b - a);
    let pad_y = 0.05 * (y_hi - y_lo);
    let (x0, x1) = (a - pad_x, b + pad_x);
    let (y0, y1) = (y_lo - pad_y, y_hi + pad_y);
    let px = |x: f64| (x - x0) / (x1 - x0) * SVG_WIDTH;
    let py = |y: f64| (y1 - y) / (y1 - y0) * SVG_HEIGHT;

    let mut svg = String::new();
    let _ = writeln!(svg, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{SVG_WIDTH}" height="{SVG_HEIGHT}" viewBox="0 0 {SVG_WIDTH} {SVG_HEIGHT}">"#
    );
    let _ = writeln!(svg, "  <title>f(x) = {}</title>", escape(spec.function()));
    let _ = writeln!(
        svg,
        r##"  <rect x="0" y="0" width="{SVG_WIDTH}" height="{SVG_HEIGHT}" fill="#ffffff"/>"##
    );
    if y0 < 0.0 && y1 > 0.0 {
        let _ = writeln!(
            svg,
            r##"  <line class="axis" x1="0" y1="{:.3}" x2="{SVG_WIDTH}" y2="{:.3}" stroke="#999999" stroke-width="1"/>"##,
            py(0.0),
            py(0.0)
        );
    }
    let points: Vec<String> = samples
        .iter()
        .map(|&(x, y)| format!("{:.3},{:.3}", px(x), py(y)))
        .collect();
    let _ = writeln!(
        svg,
        r##"  <polyline class="curve" fill="none" stroke="#1f4e79" stroke-width="2" points="{}"/>"##,
        points.join(" ")
    );
    for &(x, y) in &markers {
        let _ = writeln!(
            svg,
            r##"  <circle class="landmark" cx="{:.3}" cy="{:.3}" r="3.5" fill="#c0392b"/>"##,
            px(x),
            py(y)
        );
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}
