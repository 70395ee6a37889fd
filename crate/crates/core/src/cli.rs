//! Command-line front end.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, ValueEnum};

use crate::calculus::{build_plan, PatternSpec};
use crate::emit::{render_json, render_pattern, render_svg, render_text, shape_plan};

/// Exit code for rejected inputs.
pub const EXIT_INVALID: i32 = 2;

const GRAMMAR: &str = "\
FUNCTION SYNTAX:
    Write f in x with explicit operators: + - * / ^
    ^ is exponentiation and groups right to left; -x^2 means -(x^2).
    Multiplication must be written out: 2*x, not 2x.
    Functions: sin cos tan exp ln sqrt abs sign      Constants: pi e

    f must be positive between a and b (it may be zero at a or b, which
    closes that end of the shape) and f' must exist on [a, b].

EXAMPLE:
    revolve --function \"x^3 + 2*x^2 - 2*x + 4\" --a -3 --b 1 \\
            --stitch-gauge 22 --row-gauge 25 --scale 0.18";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
    Svg,
}

/// Crochet pattern for the surface made by revolving f(x) about the x-axis.
#[derive(Debug, Clone, Parser)]
#[command(name = "revolve", version, allow_negative_numbers = true, after_help = GRAMMAR)]
pub struct CliConfig {
    /// f(x), the profile curve that gets revolved
    #[arg(long)]
    pub function: String,
    /// Start of the surface on the x-axis
    #[arg(long)]
    pub a: f64,
    /// End of the surface on the x-axis
    #[arg(long)]
    pub b: f64,
    /// Stitches per 4 inches
    #[arg(long)]
    pub stitch_gauge: u32,
    /// Rows per 4 inches
    #[arg(long)]
    pub row_gauge: u32,
    /// Inches per unit of x
    #[arg(long)]
    pub scale: f64,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Space rows evenly over [a, b] instead of giving each local extremum its own row
    #[arg(long = "no-extrema", action = clap::ArgAction::SetFalse)]
    pub prioritize_extrema: bool,
    /// Write the output here instead of standard output
    #[arg(long)]
    pub output: Option<PathBuf>,
}

/// Produces the requested output, or a diagnostic for invalid input.
pub fn execute(config: &CliConfig) -> Result<String, String> {
    let spec = PatternSpec::new(
        &config.function,
        config.a,
        config.b,
        config.stitch_gauge,
        config.row_gauge,
        config.scale,
    )
    .map_err(|e| e.to_string())?;
    let plan = build_plan(&spec, config.prioritize_extrema).map_err(|e| e.to_string())?;
    if config.format == Format::Svg {
        return render_svg(&spec, &plan).map_err(|e| e.to_string());
    }
    let rows = shape_plan(&spec, &plan).map_err(|e| e.to_string())?;
    let doc = render_pattern(&spec, &plan, &rows, config.prioritize_extrema);
    Ok(match config.format {
        Format::Json => render_json(&doc),
        _ => render_text(&doc),
    })
}

/// Parses `args` (including the program name) and runs; returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let config = match CliConfig::try_parse_from(args) {
        Ok(config) => config,
        Err(e) => {
            let code = e.exit_code();
            let rendered = e.render();
            let _ = if e.use_stderr() {
                write!(stderr, "{}", rendered.ansi())
            } else {
                write!(stdout, "{}", rendered.ansi())
            };
            return code;
        }
    };
    let output = match execute(&config) {
        Ok(output) => output,
        Err(message) => {
            let _ = writeln!(stderr, "error: {message}");
            return EXIT_INVALID;
        }
    };
    let written = match &config.output {
        Some(path) => std::fs::write(path, output.as_bytes())
            .map_err(|e| format!("cannot write {}: {e}", path.display())),
        None => stdout
            .write_all(output.as_bytes())
            .map_err(|e| format!("cannot write output: {e}")),
    };
    match written {
        Ok(()) => 0,
        Err(message) => {
            let _ = writeln!(stderr, "error: {message}");
            1
        }
    }
}
