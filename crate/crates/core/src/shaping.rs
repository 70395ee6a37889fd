//! Stitch counts and placement of increases and decreases.
//!
//! A row that changes the stitch count by `n` places its `n` shaping
//! stitches every `q` instructions, starting at instruction `k`:
//! `D = {q*j + k : 0 <= j < n}`, where `min(s_prev, s_cur) = q*n + r`.
//! Positions are compared with the previous shaped row as ratios
//! `position / min(s_prev, s_cur)` on a circle, and `k` is chosen to
//! maximize the smallest circular gap (`d1`), tie-broken by the mean gap
//! (`d2`).

use std::cmp::Ordering;
use std::f64::consts::PI;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::calculus::PatternSpec;
use crate::expr::DomainError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ShapingOp {
    None,
    Increase,
    Decrease,
}

impl ShapingOp {
    pub fn between(s_prev: u32, s_cur: u32) -> Self {
        match s_cur.cmp(&s_prev) {
            Ordering::Greater => ShapingOp::Increase,
            Ordering::Less => ShapingOp::Decrease,
            Ordering::Equal => ShapingOp::None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ShapingError {
    #[error("distance between ratio sets needs both sets nonempty")]
    EmptyRatioSet,
}

/// Shaping decisions for one row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RowShaping {
    pub index: usize,
    pub x: f64,
    pub prev_stitches: u32,
    pub stitches: u32,
    pub op: ShapingOp,
    pub n_ops: u32,
    pub q: u32,
    pub r: u32,
    pub k: u32,
    /// 1-indexed instruction positions of the shaping stitches.
    pub positions: Vec<u32>,
    /// More than doubles or halves; single Inc/Dec cannot do it.
    pub steep: bool,
}

impl RowShaping {
    /// Instruction count, `min(s_prev, s_cur)`.
    pub fn instructions(&self) -> u32 {
        self.prev_stitches.min(self.stitches)
    }

    pub fn ratio_set(&self) -> RatioSet {
        RatioSet::new(self.positions.clone(), self.instructions())
    }
}

/// `[2π · scale · (S/4) · f(x)]`, rounded half away from zero.
pub fn stitch_count(spec: &PatternSpec, x: f64) -> Result<u32, DomainError> {
    let radius = spec.f().eval(x)?;
    let count = (2.0 * PI * spec.stitches_per_unit() * radius).round();
    Ok(if count <= 0.0 { 0 } else { count as u32 })
}

pub fn row_counts(spec: &PatternSpec, landmarks: &[f64]) -> Result<Vec<u32>, DomainError> {
    landmarks.iter().map(|&x| stitch_count(spec, x)).collect()
}

/// Positions of shaping stitches over a common denominator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RatioSet {
    positions: Vec<u32>,
    denom: u32,
}

impl RatioSet {
    pub fn new(positions: Vec<u32>, denom: u32) -> Self {
        RatioSet { positions, denom }
    }

    pub fn positions(&self) -> &[u32] {
        &self.positions
    }

    pub fn denom(&self) -> u32 {
        self.denom
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn ratios(&self) -> Vec<Ratio<i64>> {
        self.positions
            .iter()
            .map(|&p| Ratio::new(i64::from(p), i64::from(self.denom)))
            .collect()
    }
}

/// `min(|u - v|, 1 - |u - v|)`, taking the gap modulo 1.
pub fn circular_distance(u: Ratio<i64>, v: Ratio<i64>) -> Ratio<i64> {
    let one = Ratio::from_integer(1);
    let diff = u - v;
    let gap = if diff < Ratio::from_integer(0) {
        -diff
    } else {
        diff
    };
    let gap = gap - gap.floor();
    gap.min(one - gap)
}

/// Exact `d1`/`d2` pair between two ratio sets.
///
/// `d1` is the smallest circular gap over all cross pairs. `d2` is the
/// mean, over the current row's ratios, of the gap to the nearest ratio
/// of the previous row.
///
/// Every cross-pair gap is an integer multiple of `1 / (A·B)`, where `A`
/// and `B` are the two denominators, so both measures are held as integer
/// numerators over fixed denominators and compare exactly.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Separation {
    min_gap: i64,
    nearest_sum: i128,
    unit: i64,
    count: i64,
}

impl Separation {
    pub fn between(prev: &RatioSet, cur: &RatioSet) -> Result<Self, ShapingError> {
        if prev.is_empty() || cur.is_empty() {
            return Err(ShapingError::EmptyRatioSet);
        }
        let (pa, pb) = (i64::from(prev.denom), i64::from(cur.denom));
        let unit = pa * pb;
        let mut min_gap = i64::MAX;
        let mut nearest_sum: i128 = 0;
        for &y in &cur.positions {
            let nearest = prev
                .positions
                .iter()
                .map(|&x| {
                    let gap = (i64::from(y) * pa - i64::from(x) * pb).rem_euclid(unit);
                    gap.min(unit - gap)
                })
                .min()
                .expect("prev is nonempty");
            min_gap = min_gap.min(nearest);
            nearest_sum += i128::from(nearest);
        }
        Ok(Separation {
            min_gap,
            nearest_sum,
            unit,
            count: cur.len() as i64,
        })
    }

    pub fn d1(&self) -> Ratio<i64> {
        Ratio::new(self.min_gap, self.unit)
    }

    pub fn d2(&self) -> Ratio<i128> {
        Ratio::new(
            self.nearest_sum,
            i128::from(self.unit) * i128::from(self.count),
        )
    }

    pub fn d1_f64(&self) -> f64 {
        self.min_gap as f64 / self.unit as f64
    }

    pub fn d2_f64(&self) -> f64 {
        self.nearest_sum as f64 / (self.unit as f64 * self.count as f64)
    }
}

/// Smallest circular gap between the two rows' shaping stitches.
pub fn d1(prev: &RatioSet, cur: &RatioSet) -> Result<f64, ShapingError> {
    Separation::between(prev, cur).map(|s| s.d1_f64())
}

/// Mean gap from each current ratio to its nearest previous ratio.
pub fn d2(prev: &RatioSet, cur: &RatioSet) -> Result<f64, ShapingError> {
    Separation::between(prev, cur).map(|s| s.d2_f64())
}

/// Spacing for `n` shaping stitches over `instructions`: `(q, r)`.
pub fn spacing(instructions: u32, n_ops: u32) -> (u32, u32) {
    match instructions.checked_div(n_ops) {
        Some(q) => (q, instructions % n_ops),
        None => (0, 0),
    }
}

/// True when the change more than doubles or more than halves the row.
pub fn is_steep(s_prev: u32, s_cur: u32) -> bool {
    u64::from(s_cur) > 2 * u64::from(s_prev) || 2 * u64::from(s_cur) < u64::from(s_prev)
}

pub fn shifted_positions(q: u32, k: u32, n_ops: u32) -> Vec<u32> {
    (0..n_ops).map(|j| q * j + k).collect()
}

/// One `k` considered by the placement search.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub k: u32,
    pub set: RatioSet,
    pub separation: Separation,
}

/// Every shift `k = 1 ..= q + r`, scored against `prev`.
pub fn candidates(
    prev: &RatioSet,
    s_prev: u32,
    s_cur: u32,
) -> Result<Vec<Candidate>, ShapingError> {
    let instructions = s_prev.min(s_cur);
    let n_ops = s_prev.abs_diff(s_cur);
    let (q, r) = spacing(instructions, n_ops);
    if q == 0 {
        return Ok(Vec::new());
    }
    (1..=q + r)
        .map(|k| {
            let set = RatioSet::new(shifted_positions(q, k, n_ops), instructions);
            Ok(Candidate {
                k,
                separation: Separation::between(prev, &set)?,
                set,
            })
        })
        .collect()
}

/// Chooses where row `s_prev -> s_cur` puts its increases or decreases.
///
/// The search starts from `k = 1` with both scores at zero and replaces
/// the incumbent only on a strictly larger `d1`, or an equal `d1` with a
/// strictly larger `d2`; earlier shifts win full ties. Without a previous
/// shaped row the `k = 1` layout is returned as is. A steep change
/// (`q = 0`) has no valid layout and comes back with `steep` set and no
/// positions.
pub fn optimize_placement(
    prev: Option<&RatioSet>,
    index: usize,
    x: f64,
    s_prev: u32,
    s_cur: u32,
) -> RowShaping {
    let op = ShapingOp::between(s_prev, s_cur);
    let n_ops = s_prev.abs_diff(s_cur);
    let instructions = s_prev.min(s_cur);
    let (q, r) = spacing(instructions, n_ops);
    let mut row = RowShaping {
        index,
        x,
        prev_stitches: s_prev,
        stitches: s_cur,
        op,
        n_ops,
        q,
        r,
        k: 1,
        positions: Vec::new(),
        steep: is_steep(s_prev, s_cur),
    };
    if op == ShapingOp::None || q == 0 {
        return row;
    }

    row.positions = shifted_positions(q, 1, n_ops);
    let Some(prev) = prev.filter(|p| !p.is_empty()) else {
        return row;
    };

    let zero = Ratio::from_integer(0);
    let (mut best_d1, mut best_d2) = (zero, Ratio::from_integer(0i128));
    for k in 1..=q + r {
        let set = RatioSet::new(shifted_positions(q, k, n_ops), instructions);
        let score = Separation::between(prev, &set).expect("both sets nonempty");
        let (d1, d2) = (score.d1(), score.d2());
        if d1 > best_d1 || (d1 == best_d1 && d2 > best_d2) {
            best_d1 = d1;
            best_d2 = d2;
            row.k = k;
            row.positions = set.positions;
        }
    }
    row
}

/// Shapes a run of rows. `rows[0]` is the foundation row and is never
/// shaped; each later row looks back to the most recent row that had
/// shaping stitches.
pub fn shape_rows(rows: &[(usize, f64, u32)]) -> Vec<RowShaping> {
    let mut out: Vec<RowShaping> = Vec::with_capacity(rows.len());
    let mut reference: Option<RatioSet> = None;
    for (i, &(index, x, stitches)) in rows.iter().enumerate() {
        if i == 0 {
            out.push(optimize_placement(None, index, x, stitches, stitches));
            continue;
        }
        let s_prev = out[i - 1].stitches;
        let row = optimize_placement(reference.as_ref(), index, x, s_prev, stitches);
        if !row.positions.is_empty() {
            reference = Some(row.ratio_set());
        }
        out.push(row);
    }
    out
}
