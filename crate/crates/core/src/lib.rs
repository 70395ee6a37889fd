//! Crochet patterns for surfaces of revolution.
//!
//! Given `f`, an interval `[a, b]`, a crochet gauge and a scale, the crate
//! places one row per landmark along the curve, sizes each row from the
//! circumference `2πf(x)`, spaces the increases and decreases so they do
//! not stack from row to row, and renders the result as a spiral-round
//! pattern.

pub mod calculus;
pub mod cli;
pub mod emit;
pub mod expr;
pub mod shaping;

pub use calculus::{build_plan, LandmarkPlan, PatternSpec, Segment};
pub use emit::{generate, render_json, render_svg, render_text, PatternDoc};
pub use expr::Expr;
pub use shaping::RowShaping;
