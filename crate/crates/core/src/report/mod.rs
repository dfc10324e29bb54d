//! Result emission (CSV, JSON, SVG) and the drivers behind each CLI subcommand.
//!
//! CSV is the canonical output. JSON carries the same values, rounded to
//! the same number of decimals, so the two always agree numerically. SVG is
//! for looking at only.

mod commands;
mod svg;

pub use commands::{
    cmd_heatmap, cmd_patches, cmd_sweep, cmd_synth, cmd_ttest, PatchesConfig, RunConfig, SweepOutputs, SynthConfig,
    SynthModel,
};
pub use svg::{render_heatmap, render_heatmap_svg};

use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::protocol::{AlignmentRow, AlignmentTable, ModelAggregate};
use crate::stats::TTestReport;

/// Decimal places for table values unless overridden.
pub const DEFAULT_PRECISION: usize = 4;

pub const ALIGNMENT_CSV: &str = "alignment.csv";
pub const ALIGNMENT_JSON: &str = "alignment.json";
pub const AGGREGATES_CSV: &str = "aggregates.csv";
pub const TTEST_JSON: &str = "ttest.json";

/// Which optional outputs to produce; CSV tables are always written.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OutputFormats {
    pub csv: bool,
    pub json: bool,
    pub svg: bool,
}

impl Default for OutputFormats {
    fn default() -> Self {
        OutputFormats {
            csv: true,
            json: true,
            svg: true,
        }
    }
}

/// Parses a comma-separated subset of `csv,json,svg`.
impl FromStr for OutputFormats {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut f = OutputFormats {
            csv: false,
            json: false,
            svg: false,
        };
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            match part {
                "csv" => f.csv = true,
                "json" => f.json = true,
                "svg" => f.svg = true,
                other => return Err(Error::Domain(format!("unknown output format {other:?}"))),
            }
        }
        if !(f.csv || f.json || f.svg) {
            return Err(Error::Domain("no output formats given".into()));
        }
        Ok(f)
    }
}

/// Rounds through the decimal text that the CSV carries.
pub fn round_to(value: f64, decimals: usize) -> f64 {
    let v: f64 = format!("{value:.decimals$}").parse().unwrap_or(value);
    // no negative zero in outputs
    v + 0.0
}

fn fmt(value: f64, decimals: usize) -> String {
    format!("{:.decimals$}", round_to(value, decimals))
}

fn write_text(path: &Path, text: String) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(file))
}

/// `model,angle,mknn,cosine`
pub fn write_alignment_csv(table: &AlignmentTable, path: &Path, decimals: usize) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["model", "angle", "mknn", "cosine"])?;
    for r in &table.rows {
        w.write_record([
            r.model.clone(),
            r.angle.to_string(),
            fmt(r.mknn, decimals),
            fmt(r.cosine, decimals),
        ])?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// `model,rotation_augmented,mean_mknn,mean_cosine`
pub fn write_aggregates_csv(aggregates: &[ModelAggregate], path: &Path, decimals: usize) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["model", "rotation_augmented", "mean_mknn", "mean_cosine"])?;
    for a in aggregates {
        w.write_record([
            a.model.clone(),
            a.rotation_augmented.to_string(),
            fmt(a.mean_mknn, decimals),
            fmt(a.mean_cosine, decimals),
        ])?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// A copy of `table` with every score rounded as in the CSV files.
pub fn rounded(table: &AlignmentTable, decimals: usize) -> AlignmentTable {
    let mut t = table.clone();
    for r in &mut t.rows {
        r.mknn = round_to(r.mknn, decimals);
        r.cosine = round_to(r.cosine, decimals);
    }
    for a in &mut t.aggregates {
        a.mean_mknn = round_to(a.mean_mknn, decimals);
        a.mean_cosine = round_to(a.mean_cosine, decimals);
    }
    t
}

pub fn write_alignment_json(table: &AlignmentTable, path: &Path, decimals: usize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(&rounded(table, decimals))?;
    text.push('\n');
    write_text(path, text)
}

pub fn write_ttest_json(reports: &[TTestReport], path: &Path) -> Result<()> {
    let mut text = serde_json::to_string_pretty(reports)?;
    text.push('\n');
    write_text(path, text)
}

#[derive(Deserialize, Serialize)]
struct AlignmentCsvRow {
    model: String,
    angle: u32,
    mknn: f64,
    cosine: f64,
}

pub fn read_alignment_csv(path: &Path) -> Result<Vec<AlignmentRow>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| annotate(path, e))?;
    r.deserialize::<AlignmentCsvRow>()
        .map(|row| {
            let row = row.map_err(|e| annotate(path, e))?;
            Ok(AlignmentRow {
                model: row.model,
                angle: row.angle,
                mknn: row.mknn,
                cosine: row.cosine,
            })
        })
        .collect()
}

pub fn read_aggregates_csv(path: &Path) -> Result<Vec<ModelAggregate>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| annotate(path, e))?;
    r.deserialize::<ModelAggregate>()
        .map(|row| row.map_err(|e| annotate(path, e)))
        .collect()
}

fn annotate(path: &Path, e: csv::Error) -> Error {
    if !e.is_io_error() {
        return Error::Format(format!("{}: {e}", path.display()));
    }
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Format(format!("{}: {other:?}", path.display())),
    }
}

/// Rebuilds a table from `alignment.csv` rows; models keep first-appearance
/// order and angles are the sorted union. Aggregates are left empty.
pub fn table_from_rows(k: usize, rows: Vec<AlignmentRow>) -> AlignmentTable {
    let mut models: Vec<crate::protocol::ModelInfo> = Vec::new();
    let mut angles: Vec<u32> = Vec::new();
    for r in &rows {
        if !models.iter().any(|m| m.model == r.model) {
            models.push(crate::protocol::ModelInfo {
                model: r.model.clone(),
                rotation_augmented: false,
            });
        }
        if !angles.contains(&r.angle) {
            angles.push(r.angle);
        }
    }
    angles.sort_unstable();
    AlignmentTable {
        k,
        angles,
        models,
        rows,
        aggregates: Vec::new(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formats_parse() {
        let f: OutputFormats = "csv".parse().unwrap();
        assert!(f.csv && !f.json && !f.svg);
        let f: OutputFormats = "svg, json".parse().unwrap();
        assert!(!f.csv && f.json && f.svg);
        assert!("pdf".parse::<OutputFormats>().is_err());
        assert!("".parse::<OutputFormats>().is_err());
    }

    #[test]
    fn rounding() {
        assert_eq!(round_to(0.123_456, 4), 0.1235);
        assert_eq!(round_to(1.0, 4), 1.0);
        assert!(round_to(-0.0, 4).is_sign_positive());
        assert!(round_to(-0.000_01, 4).is_sign_positive());
        assert_eq!(fmt(0.5, 4), "0.5000");
    }

    #[test]
    fn aggregates_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.csv");
        let aggs = vec![
            ModelAggregate {
                model: "a,b".into(),
                rotation_augmented: true,
                mean_mknn: 0.812_34,
                mean_cosine: 0.0156,
            },
            ModelAggregate {
                model: "c".into(),
                rotation_augmented: false,
                mean_mknn: 0.5,
                mean_cosine: 0.145,
            },
        ];
        write_aggregates_csv(&aggs, &path, 4).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("model,rotation_augmented,mean_mknn,mean_cosine\n\"a,b\",true,0.8123,0.0156\n"));
        let back = read_aggregates_csv(&path).unwrap();
        assert_eq!(back[0].mean_mknn, 0.8123);
        assert_eq!(back[1], aggs[1]);
    }

    #[test]
    fn malformed_csv_is_format_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.csv");
        fs::write(&path, "model,angle,mknn,cosine\nm,notanumber,1,0\n").unwrap();
        assert!(matches!(read_alignment_csv(&path), Err(Error::Format(_))));
        assert!(matches!(
            read_alignment_csv(&dir.path().join("nope.csv")),
            Err(Error::Io { .. })
        ));
    }
}
