//! CSV and JSON artifacts.
//!
//! CSV columns, in order: `study_id, alpha, u0, rho, M, m, k, n, lambda,
//! trace_restricted, trace_masked, d_value, slope, slope_err, r_squared`.
//! Missing values are empty fields; floats use the shortest decimal that
//! reads back to the same `f64`.

use crate::config::{OutputFormat, RunConfig};
use crate::error::Result;
use serde::{Deserialize, Serialize};
use std::fs;
use std::path::{Path, PathBuf};

pub const COLUMNS: [&str; 15] = [
    "study_id",
    "alpha",
    "u0",
    "rho",
    "M",
    "m",
    "k",
    "n",
    "lambda",
    "trace_restricted",
    "trace_masked",
    "d_value",
    "slope",
    "slope_err",
    "r_squared",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct ResultRecord {
    pub study_id: String,
    pub alpha: Option<f64>,
    pub u0: Option<f64>,
    pub rho: Option<f64>,
    #[serde(rename = "M")]
    pub mass: Option<f64>,
    pub m: Option<f64>,
    pub k: Option<f64>,
    pub n: Option<usize>,
    pub lambda: Option<f64>,
    pub trace_restricted: Option<f64>,
    pub trace_masked: Option<f64>,
    pub d_value: Option<f64>,
    pub slope: Option<f64>,
    pub slope_err: Option<f64>,
    pub r_squared: Option<f64>,
}

/// Everything a command produced, in a form that round-trips through JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudySummary {
    pub command: String,
    pub config: RunConfig,
    pub records: Vec<ResultRecord>,
    /// Named scalar results, such as a predicted slope.
    pub values: Vec<(String, f64)>,
}

pub fn write_csv(path: &Path, records: &[ResultRecord]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_path(path)?;
    w.write_record(COLUMNS)?;
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv(path: &Path) -> Result<Vec<ResultRecord>> {
    let mut r = csv::Reader::from_path(path)?;
    let mut out = Vec::new();
    for rec in r.deserialize() {
        out.push(rec?);
    }
    Ok(out)
}

pub fn write_json(path: &Path, summary: &StudySummary) -> Result<()> {
    fs::write(path, serde_json::to_string_pretty(summary)? + "\n")?;
    Ok(())
}

pub fn read_json(path: &Path) -> Result<StudySummary> {
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}

/// Two whitespace-separated columns for plotting programs.
pub fn write_xy(path: &Path, header: &str, points: &[(f64, f64)]) -> Result<()> {
    let mut s = format!("# {header}\n");
    for (x, y) in points {
        s.push_str(&format!("{x} {y}\n"));
    }
    fs::write(path, s)?;
    Ok(())
}

/// Writes the records under `dir`, named after the command: `<command>.csv`
/// plus a `<command>.summary.json` for CSV output, or `<command>.json`.
pub fn write_results(dir: &Path, summary: &StudySummary, format: OutputFormat) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let stem = summary.command.replace(' ', "-");
    match format {
        OutputFormat::Csv => {
            let csv = dir.join(format!("{stem}.csv"));
            write_csv(&csv, &summary.records)?;
            let json = dir.join(format!("{stem}.summary.json"));
            write_json(&json, summary)?;
            Ok(vec![csv, json])
        }
        OutputFormat::Json => {
            let p = dir.join(format!("{stem}.json"));
            write_json(&p, summary)?;
            Ok(vec![p])
        }
    }
}
