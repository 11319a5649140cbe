//! CSV, JSON and plot-data rendering, and atomic file output.

use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::config::OutputFormat;
use crate::error::{CliError, CliResult};

pub const CSV_HEADER: [&str; 5] = ["k", "value", "formula", "argmin", "tail_verified"];

#[derive(Debug, Clone, PartialEq)]
pub struct TableRow {
    pub k: u32,
    pub value: f64,
    pub formula: String,
    pub argmin: bool,
    pub tail_verified: bool,
}

impl TableRow {
    pub fn new(k: u32, value: f64, formula: impl Into<String>) -> Self {
        Self {
            k,
            value,
            formula: formula.into(),
            argmin: false,
            tail_verified: false,
        }
    }

    pub fn argmin(mut self, yes: bool) -> Self {
        self.argmin = yes;
        self
    }

    pub fn tail_verified(mut self, yes: bool) -> Self {
        self.tail_verified = yes;
        self
    }
}

/// One plot-data block.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

/// Everything a command produces, ready to render in any format.
#[derive(Debug, Clone)]
pub struct Rendered {
    pub json: String,
    pub rows: Vec<TableRow>,
    pub series: Vec<Series>,
}

impl Rendered {
    pub fn new<T: Serialize>(record: &T, rows: Vec<TableRow>, series: Vec<Series>) -> CliResult<Self> {
        let json = serde_json::to_string_pretty(record).map_err(|e| CliError::Serialize(e.to_string()))?;
        Ok(Self { json, rows, series })
    }

    pub fn render(&self, format: OutputFormat) -> CliResult<String> {
        match format {
            OutputFormat::Json => Ok(format!("{}\n", self.json)),
            OutputFormat::Csv => to_csv(&self.rows),
            OutputFormat::PlotData => Ok(to_plot_data(&self.series)),
        }
    }
}

/// 17 significant digits, enough to round-trip any f64.
pub fn fmt_value(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

pub fn to_csv(rows: &[TableRow]) -> CliResult<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| CliError::Serialize(e.to_string());
    w.write_record(CSV_HEADER).map_err(err)?;
    for r in rows {
        w.write_record([
            r.k.to_string(),
            fmt_value(r.value),
            r.formula.clone(),
            r.argmin.to_string(),
            r.tail_verified.to_string(),
        ])
        .map_err(err)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Serialize(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Serialize(e.to_string()))
}

pub fn to_plot_data(series: &[Series]) -> String {
    let mut out = String::new();
    for (i, s) in series.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        out.push_str(&format!("# {}\n", s.label));
        for (x, y) in &s.points {
            out.push_str(&format!("{} {}\n", fmt_value(*x), fmt_value(*y)));
        }
    }
    out
}

/// Groups rows by formula into (k, value) series, keeping first-seen order.
pub fn series_by_formula(rows: &[TableRow]) -> Vec<Series> {
    let mut out: Vec<Series> = Vec::new();
    for r in rows {
        let point = (r.k as f64, r.value);
        match out.iter_mut().find(|s| s.label == r.formula) {
            Some(s) => s.points.push(point),
            None => out.push(Series {
                label: r.formula.clone(),
                points: vec![point],
            }),
        }
    }
    out
}

/// Writes through a temp file in the target directory, then renames.
pub fn write_atomic(path: &Path, contents: &str) -> CliResult<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| CliError::Io(e.error))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout() {
        let rows = vec![TableRow::new(1, 2.25, "J").argmin(true).tail_verified(true)];
        let s = to_csv(&rows).unwrap();
        assert_eq!(
            s,
            "k,value,formula,argmin,tail_verified\n1,2.2500000000000000e0,J,true,true\n"
        );
    }

    #[test]
    fn values_round_trip() {
        for x in [0.1, 1.0 / 3.0, 3969.0 / 676.0, 1e-300, 6.02e23] {
            assert_eq!(fmt_value(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn plot_blocks_are_separated() {
        let rows = vec![
            TableRow::new(0, 1.0, "a"),
            TableRow::new(1, 2.0, "a"),
            TableRow::new(0, 3.0, "b"),
        ];
        let s = to_plot_data(&series_by_formula(&rows));
        let blocks: Vec<&str> = s.split("\n\n").collect();
        assert_eq!(blocks.len(), 2);
        assert_eq!(blocks[0].lines().count(), 3);
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("out.json");
        write_atomic(&p, "one").unwrap();
        write_atomic(&p, "two").unwrap();
        assert_eq!(std::fs::read_to_string(&p).unwrap(), "two");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
