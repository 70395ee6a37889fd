//! Arclength measured in crochet rows, extremum search, and row landmark
//! placement.
//!
//! The arclength of `f` between `lo` and `hi`, expressed in rows, is
//! `(scale * R / 4) * ∫ sqrt(1 + f'(x)^2) dx`. A landmark is the x-value
//! where a row's circumference gets measured; row `i` of a segment sits at
//! `i * L / [L]` rows from the segment start, where `L` is the segment's
//! arclength in rows and `[L]` its rounded value.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::{DomainError, Expr, ParseError};

/// Sample count used to check positivity and derivative definedness.
pub const VALIDATION_SAMPLES: usize = 2048;
/// Uniform subintervals scanned for sign changes of `f'`.
pub const EXTREMA_GRID: usize = 4096;
/// Absolute tolerance of the arclength quadrature (raw integral units).
pub const QUAD_TOLERANCE: f64 = 1e-8;
/// Recursion limit of adaptive Simpson.
pub const QUAD_MAX_DEPTH: u32 = 50;
/// Landmark bisection stops once the bracket is narrower than this.
pub const LANDMARK_BRACKET: f64 = 1e-4;

const EXTREMUM_TOLERANCE: f64 = 1e-9;
const EXTREMUM_DEDUP: f64 = 1e-6;
// Endpoint values this close to zero are treated as roots, not negatives.
const ENDPOINT_ZERO: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpecError {
    #[error("invalid function: {0}")]
    Parse(#[from] ParseError),
    #[error("a must be less than b (got a = {a}, b = {b})")]
    InvalidInterval { a: f64, b: f64 },
    #[error("{name} must be positive")]
    NonPositive { name: &'static str },
    #[error("f is undefined on [a, b]: {0}")]
    FunctionUndefined(DomainError),
    #[error("f' is undefined on [a, b]: {0}")]
    DerivativeUndefined(DomainError),
    #[error("f must be positive between a and b, but f({x}) = {value}")]
    NotPositive { x: f64, value: f64 },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CalcError {
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error("arclength quadrature did not converge on [{lo}, {hi}]")]
    Quadrature { lo: f64, hi: f64 },
}

/// The six pattern inputs, validated.
#[derive(Debug, Clone)]
pub struct PatternSpec {
    function: String,
    f: Expr,
    df: Expr,
    a: f64,
    b: f64,
    stitch_gauge: u32,
    row_gauge: u32,
    scale: f64,
}

impl PatternSpec {
    pub fn new(
        function: &str,
        a: f64,
        b: f64,
        stitch_gauge: u32,
        row_gauge: u32,
        scale: f64,
    ) -> Result<Self, SpecError> {
        let f = Expr::parse(function)?;
        Self::from_expr(function, f, a, b, stitch_gauge, row_gauge, scale)
    }

    pub fn from_expr(
        function: &str,
        f: Expr,
        a: f64,
        b: f64,
        stitch_gauge: u32,
        row_gauge: u32,
        scale: f64,
    ) -> Result<Self, SpecError> {
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(SpecError::InvalidInterval { a, b });
        }
        if stitch_gauge == 0 {
            return Err(SpecError::NonPositive {
                name: "stitch gauge",
            });
        }
        if row_gauge == 0 {
            return Err(SpecError::NonPositive { name: "row gauge" });
        }
        if !(scale.is_finite() && scale > 0.0) {
            return Err(SpecError::NonPositive { name: "scale" });
        }
        let df = f.derivative();
        let last = VALIDATION_SAMPLES - 1;
        for i in 0..VALIDATION_SAMPLES {
            let x = sample(a, b, i, last);
            let value = f.eval(x).map_err(SpecError::FunctionUndefined)?;
            df.eval(x).map_err(SpecError::DerivativeUndefined)?;
            let endpoint = i == 0 || i == last;
            let ok = if endpoint {
                value >= -ENDPOINT_ZERO
            } else {
                value > 0.0
            };
            if !ok {
                return Err(SpecError::NotPositive { x, value });
            }
        }
        Ok(PatternSpec {
            function: function.trim().to_string(),
            f,
            df,
            a,
            b,
            stitch_gauge,
            row_gauge,
            scale,
        })
    }

    pub fn function(&self) -> &str {
        &self.function
    }

    pub fn f(&self) -> &Expr {
        &self.f
    }

    pub fn derivative(&self) -> &Expr {
        &self.df
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn stitch_gauge(&self) -> u32 {
        self.stitch_gauge
    }

    pub fn row_gauge(&self) -> u32 {
        self.row_gauge
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Rows per unit of arclength.
    pub fn rows_per_unit(&self) -> f64 {
        self.scale * f64::from(self.row_gauge) / 4.0
    }

    /// Stitches per unit of circumference.
    pub fn stitches_per_unit(&self) -> f64 {
        self.scale * f64::from(self.stitch_gauge) / 4.0
    }
}

fn sample(a: f64, b: f64, i: usize, last: usize) -> f64 {
    if i == last {
        b
    } else {
        a + (b - a) * i as f64 / last as f64
    }
}

/// One stretch of the curve between consecutive extrema (or endpoints).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub lo: f64,
    pub hi: f64,
    pub arclength_rows: f64,
    pub row_count: usize,
}

impl Segment {
    pub fn new(spec: &PatternSpec, lo: f64, hi: f64) -> Result<Self, CalcError> {
        let arclength_rows = arclength_rows(spec, lo, hi)?;
        Ok(Segment {
            lo,
            hi,
            arclength_rows,
            row_count: (arclength_rows.round() as usize).max(1),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LandmarkPlan {
    pub segments: Vec<Segment>,
    pub landmarks: Vec<f64>,
    pub total_rows: usize,
}

/// Arclength of `f` over `[lo, hi]` in row units.
pub fn arclength_rows(spec: &PatternSpec, lo: f64, hi: f64) -> Result<f64, CalcError> {
    let df = spec.derivative();
    let integrand = |x: f64| -> Result<f64, DomainError> {
        let slope = df.eval(x)?;
        Ok((1.0 + slope * slope).sqrt())
    };
    Ok(spec.rows_per_unit() * integrate(integrand, lo, hi, QUAD_TOLERANCE)?)
}

// Starting panels for adaptive Simpson; a single Simpson panel can miss
// oscillations that happen to cancel at its five sample points.
const QUAD_PANELS: usize = 16;

/// Adaptive Simpson quadrature with absolute tolerance `tol`.
pub fn integrate<F>(f: F, lo: f64, hi: f64, tol: f64) -> Result<f64, CalcError>
where
    F: Fn(f64) -> Result<f64, DomainError>,
{
    if lo == hi {
        return Ok(0.0);
    }
    let width = (hi - lo) / QUAD_PANELS as f64;
    let panel_tol = tol / QUAD_PANELS as f64;
    let mut total = 0.0;
    for i in 0..QUAD_PANELS {
        let a = lo + width * i as f64;
        let b = if i + 1 == QUAD_PANELS {
            hi
        } else {
            lo + width * (i + 1) as f64
        };
        let m = 0.5 * (a + b);
        let (fa, fm, fb) = (f(a)?, f(m)?, f(b)?);
        let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
        total +=
            simpson_step(&f, a, b, fa, fm, fb, whole, panel_tol, QUAD_MAX_DEPTH).map_err(|e| {
                match e {
                    CalcError::Quadrature { .. } => CalcError::Quadrature { lo, hi },
                    e => e,
                }
            })?;
    }
    Ok(total)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> Result<f64, CalcError>
where
    F: Fn(f64) -> Result<f64, DomainError>,
{
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm)?, f(rm)?);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if delta.abs() <= 15.0 * tol {
        return Ok(left + right + delta / 15.0);
    }
    // Out of depth, or the panel can no longer be split in floating point.
    if depth == 0 || lm <= a || rm >= b {
        return Err(CalcError::Quadrature { lo: a, hi: b });
    }
    let half = 0.5 * tol;
    Ok(simpson_step(f, a, m, fa, flm, fm, left, half, depth - 1)?
        + simpson_step(f, m, b, fm, frm, fb, right, half, depth - 1)?)
}

/// Interior points of `(a, b)` where `f'` changes sign, ascending.
pub fn find_extrema(spec: &PatternSpec) -> Result<Vec<f64>, CalcError> {
    let df = spec.derivative();
    let (a, b) = (spec.a(), spec.b());
    let grid: Vec<f64> = (0..=EXTREMA_GRID)
        .map(|i| sample(a, b, i, EXTREMA_GRID))
        .collect();
    let values = grid
        .iter()
        .map(|&x| df.eval(x))
        .collect::<Result<Vec<_>, _>>()?;

    let mut roots: Vec<f64> = Vec::new();
    for i in 0..EXTREMA_GRID {
        let (v0, v1) = (values[i], values[i + 1]);
        if v0 == 0.0 {
            // Exact zero on an interior grid point: a root if the sign flips across it.
            if i > 0 && values[i - 1] * v1 < 0.0 {
                roots.push(grid[i]);
            }
        } else if v0 * v1 < 0.0 {
            roots.push(bisect_sign_change(df, grid[i], grid[i + 1], v0)?);
        }
    }
    roots.retain(|&x| x - a > EXTREMUM_DEDUP && b - x > EXTREMUM_DEDUP);
    roots.dedup_by(|later, earlier| (*later - *earlier).abs() <= EXTREMUM_DEDUP);
    Ok(roots)
}

fn bisect_sign_change(df: &Expr, mut lo: f64, mut hi: f64, f_lo: f64) -> Result<f64, CalcError> {
    let lo_negative = f_lo < 0.0;
    while hi - lo > EXTREMUM_TOLERANCE {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let v = df.eval(mid)?;
        if v == 0.0 {
            return Ok(mid);
        }
        if (v < 0.0) == lo_negative {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Rounds to two decimal places, halves away from zero.
pub fn round_to_hundredths(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}

/// Landmarks of one segment: `row_count + 1` values from `lo` to `hi`.
///
/// Interior landmarks are solved by bisection on the arclength measured
/// from `seg.lo` and then rounded to hundredths. A rounded value that would
/// not land strictly between its predecessor and the next solution is kept
/// unrounded, so landmarks stay strictly increasing on steep curves.
pub fn solve_landmarks(spec: &PatternSpec, seg: &Segment) -> Result<Vec<f64>, CalcError> {
    let rows = seg.row_count.max(1);
    let step = seg.arclength_rows / rows as f64;
    let mut raw = Vec::with_capacity(rows + 1);
    let mut bracket_lo = seg.lo;
    for i in 1..rows {
        let target = step * i as f64;
        let mut lo = bracket_lo;
        let mut hi = seg.hi;
        while hi - lo >= LANDMARK_BRACKET {
            let mid = 0.5 * (lo + hi);
            if arclength_rows(spec, seg.lo, mid)? < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let x = 0.5 * (lo + hi);
        raw.push(x);
        bracket_lo = lo;
    }

    let mut landmarks = Vec::with_capacity(rows + 1);
    landmarks.push(seg.lo);
    for (i, &x) in raw.iter().enumerate() {
        let prev = *landmarks.last().expect("segment start pushed");
        let next = raw.get(i + 1).copied().unwrap_or(seg.hi);
        let rounded = round_to_hundredths(x);
        landmarks.push(if prev < rounded && rounded < next {
            rounded
        } else {
            x
        });
    }
    landmarks.push(seg.hi);
    Ok(landmarks)
}

/// Places every row of the pattern.
///
/// With `prioritize_extrema`, the curve is split at each local extremum of
/// `f` so those x-values get a row of their own; otherwise `[a, b]` is
/// treated as a single segment.
pub fn build_plan(spec: &PatternSpec, prioritize_extrema: bool) -> Result<LandmarkPlan, CalcError> {
    let mut breaks = vec![spec.a()];
    if prioritize_extrema {
        breaks.extend(find_extrema(spec)?);
    }
    breaks.push(spec.b());

    let segments = breaks
        .windows(2)
        .map(|w| Segment::new(spec, w[0], w[1]))
        .collect::<Result<Vec<_>, _>>()?;

    let mut landmarks = vec![spec.a()];
    for seg in &segments {
        landmarks.extend(solve_landmarks(spec, seg)?.into_iter().skip(1));
    }
    let total_rows = segments.iter().map(|s| s.row_count).sum();
    Ok(LandmarkPlan {
        segments,
        landmarks,
        total_rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn running() -> PatternSpec {
        PatternSpec::new("x^3 + 2*x^2 - 2*x + 4", -3.0, 1.0, 22, 25, 0.18).unwrap()
    }

    fn m1() -> f64 {
        (-2.0 - 10f64.sqrt()) / 3.0
    }

    fn m2() -> f64 {
        (-2.0 + 10f64.sqrt()) / 3.0
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(matches!(
            PatternSpec::new("x", 1.0, 0.0, 22, 25, 1.0),
            Err(SpecError::InvalidInterval { .. })
        ));
        assert!(matches!(
            PatternSpec::new("x - 1", 0.0, 2.0, 22, 25, 1.0),
            Err(SpecError::NotPositive { .. })
        ));
        assert!(matches!(
            PatternSpec::new("sqrt(x)", 0.0, 1.0, 22, 25, 1.0),
            Err(SpecError::DerivativeUndefined(_))
        ));
        assert!(matches!(
            PatternSpec::new("x", 0.0, 1.0, 0, 25, 1.0),
            Err(SpecError::NonPositive { .. })
        ));
        assert!(matches!(
            PatternSpec::new("x", 0.0, 1.0, 22, 25, -1.0),
            Err(SpecError::NonPositive { .. })
        ));
        assert!(matches!(
            PatternSpec::new("x +", 0.0, 1.0, 22, 25, 1.0),
            Err(SpecError::Parse(_))
        ));
        // roots at the endpoints are allowed
        assert!(PatternSpec::new("sin(x)", 0.0, std::f64::consts::PI, 22, 25, 2.0).is_ok());
    }

    #[test]
    fn line_arclength_is_sqrt2() {
        let spec = PatternSpec::new("x", 0.0, 1.0, 4, 4, 1.0).unwrap();
        let l = arclength_rows(&spec, 0.0, 1.0).unwrap();
        assert!((l - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn running_example_segment_arclengths() {
        let spec = running();
        let l0 = arclength_rows(&spec, -3.0, m1()).unwrap();
        let l1 = arclength_rows(&spec, m1(), m2()).unwrap();
        let l2 = arclength_rows(&spec, m2(), 1.0).unwrap();
        assert!((l0 - 8.434).abs() < 0.005, "{l0}");
        assert!((l1 - 5.923).abs() < 0.005, "{l1}");
        assert!((l2 - 1.805).abs() < 0.005, "{l2}");
        let total = arclength_rows(&spec, -3.0, 1.0).unwrap();
        assert!((total - 16.162).abs() < 0.01, "{total}");
        assert!((total - (l0 + l1 + l2)).abs() < 1e-6);
    }

    #[test]
    fn raw_integral_matches_trapezoid_oracle() {
        let spec = running();
        // 10^6-panel trapezoid rule on sqrt(1 + (3x^2 + 4x - 2)^2).
        let g = |x: f64| (1.0 + (3.0 * x * x + 4.0 * x - 2.0).powi(2)).sqrt();
        let n = 1_000_000;
        let h = 4.0 / n as f64;
        let mut sum = 0.5 * (g(-3.0) + g(1.0));
        for i in 1..n {
            sum += g(-3.0 + h * i as f64);
        }
        let oracle = sum * h;
        let raw = arclength_rows(&spec, -3.0, 1.0).unwrap() / spec.rows_per_unit();
        assert!((raw - oracle).abs() < 1e-6, "{raw} vs {oracle}");
        assert!((raw - 14.366).abs() < 1e-3);
    }

    #[test]
    fn extrema_of_running_example() {
        let ex = find_extrema(&running()).unwrap();
        assert_eq!(ex.len(), 2);
        assert!((ex[0] - m1()).abs() < 1e-8);
        assert!((ex[1] - m2()).abs() < 1e-8);
    }

    #[test]
    fn extrema_of_monotone_and_periodic() {
        let spec = PatternSpec::new("x + 2", 0.0, 1.0, 22, 25, 1.0).unwrap();
        assert!(find_extrema(&spec).unwrap().is_empty());

        let tau = 2.0 * std::f64::consts::PI;
        let spec = PatternSpec::new("sin(x) + 2", 0.0, tau, 22, 25, 1.0).unwrap();
        let ex = find_extrema(&spec).unwrap();
        assert_eq!(ex.len(), 2, "{ex:?}");
        assert!((ex[0] - std::f64::consts::FRAC_PI_2).abs() < 1e-6);
        assert!((ex[1] - 3.0 * std::f64::consts::FRAC_PI_2).abs() < 1e-6);
    }

    #[test]
    fn uniform_line_landmarks() {
        // slope 1: 4 rows over [0, 2] when scale * R / 4 * 2 * sqrt(2) = 4
        let spec = PatternSpec::new("x", 0.0, 2.0, 22, 4, 2f64.sqrt()).unwrap();
        let seg = Segment::new(&spec, 0.0, 2.0).unwrap();
        assert_eq!(seg.row_count, 4);
        let xs = solve_landmarks(&spec, &seg).unwrap();
        assert_eq!(xs, vec![0.0, 0.5, 1.0, 1.5, 2.0]);
    }

    #[test]
    fn running_example_segment_landmarks() {
        let spec = running();
        let seg = Segment::new(&spec, -3.0, m1()).unwrap();
        assert_eq!(seg.row_count, 8);
        let xs = solve_landmarks(&spec, &seg).unwrap();
        let expected = [-3.0, -2.93, -2.84, -2.75, -2.65, -2.53, -2.38, -2.18, m1()];
        assert_eq!(xs.len(), expected.len());
        for (x, e) in xs.iter().zip(expected) {
            assert!((x - e).abs() < 1e-9, "{xs:?}");
        }

        let seg = Segment::new(&spec, m2(), 1.0).unwrap();
        assert_eq!(seg.row_count, 2);
        let xs = solve_landmarks(&spec, &seg).unwrap();
        assert_eq!(xs, vec![m2(), 0.81, 1.0]);
    }

    #[test]
    fn single_row_segment() {
        let spec = PatternSpec::new("3", 0.0, 0.1, 22, 4, 1.0).unwrap();
        let plan = build_plan(&spec, true).unwrap();
        assert_eq!(plan.total_rows, 1);
        assert_eq!(plan.landmarks, vec![0.0, 0.1]);
    }

    #[test]
    fn rounding_collision_keeps_landmarks_increasing() {
        // Very steep: many rows inside each hundredth of x.
        let spec = PatternSpec::new("200*x + 1", 0.0, 0.05, 22, 25, 1.0).unwrap();
        let plan = build_plan(&spec, false).unwrap();
        assert_eq!(plan.landmarks.len(), plan.total_rows + 1);
        assert!(
            plan.landmarks.windows(2).all(|w| w[0] < w[1]),
            "{:?}",
            plan.landmarks
        );
    }
}
