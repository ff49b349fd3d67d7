//! Versioned CSV format for harness reports.
//!
//! ```text
//! # kinpart-simulate-csv v1
//! # config {"subcommand":"simulate",...}
//! d,N,x_abscissa,...
//! ```
//!
//! Floats are written as shortest round-trip decimals, so parsing a file
//! gives back exactly the numbers that were written. Absent values are empty
//! fields.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::harness::TermReport;

pub const FORMAT_LINE: &str = "# kinpart-simulate-csv v1";
pub const CONFIG_PREFIX: &str = "# config ";

pub const COLUMNS: [&str; 19] = [
    "d",
    "N",
    "x_abscissa",
    "mass_mode",
    "term",
    "count",
    "mean",
    "variance_biased",
    "stderr",
    "min",
    "max",
    "expected",
    "abs_diff",
    "weighted_diff",
    "sigma_ratio",
    "fraction_negative",
    "fraction_positive",
    "degenerate_excluded",
    "seed",
];

/// Shortest decimal that parses back to `x`; scientific notation outside
/// `[1e-5, 1e16)`.
pub fn format_float(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || (1e-5..1e16).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(format_float).unwrap_or_default()
}

pub fn write_reports<W: Write>(out: W, config_json: &str, rows: &[TermReport]) -> Result<()> {
    if config_json.contains('\n') {
        return Err(Error::InvalidArgument("config header must be a single line".into()));
    }
    let mut out = out;
    writeln!(out, "{FORMAT_LINE}")?;
    writeln!(out, "{CONFIG_PREFIX}{config_json}")?;
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(COLUMNS)?;
    for r in rows {
        w.write_record([
            r.d.to_string(),
            r.n.to_string(),
            format_float(r.x_abscissa),
            r.mass_mode.to_string(),
            r.term.clone(),
            r.count.to_string(),
            format_float(r.mean),
            format_float(r.variance_biased),
            format_float(r.stderr),
            format_float(r.min),
            format_float(r.max),
            opt(r.expected),
            opt(r.abs_diff),
            opt(r.weighted_diff),
            opt(r.sigma_ratio),
            opt(r.fraction_negative),
            opt(r.fraction_positive),
            r.degenerate_excluded.to_string(),
            r.seed.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, serde::Deserialize)]
struct Row {
    d: u32,
    #[serde(rename = "N")]
    n: u32,
    x_abscissa: f64,
    mass_mode: crate::ensemble::MassMode,
    term: String,
    count: u64,
    mean: f64,
    variance_biased: f64,
    stderr: f64,
    min: f64,
    max: f64,
    expected: Option<f64>,
    abs_diff: Option<f64>,
    weighted_diff: Option<f64>,
    sigma_ratio: Option<f64>,
    fraction_negative: Option<f64>,
    fraction_positive: Option<f64>,
    degenerate_excluded: u64,
    seed: u64,
}

/// Parsed file: the raw config JSON from the header and the rows.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedCsv {
    pub config_json: String,
    pub rows: Vec<TermReport>,
}

pub fn read_reports<R: BufRead>(input: R) -> Result<ParsedCsv> {
    let mut input = input;
    let mut line = String::new();
    input.read_line(&mut line)?;
    if line.trim_end() != FORMAT_LINE {
        return Err(Error::Malformed(format!("expected `{FORMAT_LINE}` on the first line")));
    }
    line.clear();
    input.read_line(&mut line)?;
    let config_json = line
        .trim_end()
        .strip_prefix(CONFIG_PREFIX)
        .ok_or_else(|| Error::Malformed("missing `# config` line".into()))?
        .to_string();

    let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(input);
    let header = reader.headers()?.clone();
    if header.iter().ne(COLUMNS.iter().copied()) {
        return Err(Error::Malformed(format!(
            "unexpected columns: {}",
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut rows = Vec::new();
    for rec in reader.deserialize::<Row>() {
        let r = rec?;
        r.term.parse::<crate::terms::Term>()?;
        rows.push(TermReport {
            d: r.d,
            n: r.n,
            x_abscissa: r.x_abscissa,
            mass_mode: r.mass_mode,
            term: r.term,
            count: r.count,
            mean: r.mean,
            variance_biased: r.variance_biased,
            stderr: r.stderr,
            min: r.min,
            max: r.max,
            expected: r.expected,
            abs_diff: r.abs_diff,
            weighted_diff: r.weighted_diff,
            sigma_ratio: r.sigma_ratio,
            fraction_negative: r.fraction_negative,
            fraction_positive: r.fraction_positive,
            degenerate_excluded: r.degenerate_excluded,
            seed: r.seed,
        });
    }
    Ok(ParsedCsv { config_json, rows })
}
