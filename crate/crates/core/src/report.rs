//! CSV and plain-text result tables.

use std::fmt::Write as _;
use std::str::FromStr;

use crate::controller::ControlMode;
use crate::error::{Error, Result};
use crate::experiment::{BatchStats, MeanStd};

pub const CSV_HEADER: [&str; 13] = [
    "object",
    "grasp_height",
    "mode",
    "roll_mean",
    "roll_std",
    "pitch_mean",
    "pitch_std",
    "all_mean",
    "all_std",
    "lt1",
    "lt2",
    "topples",
    "trials",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Txt,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "txt" => Ok(ReportFormat::Txt),
            other => Err(Error::UnsupportedFormat(other.to_string())),
        }
    }
}

impl ReportFormat {
    pub fn extension(self) -> &'static str {
        match self {
            ReportFormat::Csv => "csv",
            ReportFormat::Txt => "txt",
        }
    }
}

/// One table cell group: an object, grasp height and mode.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub object: String,
    /// m
    pub grasp_height: f64,
    pub mode: ControlMode,
    pub stats: BatchStats,
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |x| x.to_string())
}

pub fn emit_report(rows: &[ReportRow], format: ReportFormat) -> Result<Vec<u8>> {
    match format {
        ReportFormat::Csv => emit_csv(rows),
        ReportFormat::Txt => Ok(emit_txt(rows).into_bytes()),
    }
}

/// Like [`emit_report`] but with the format given by name.
pub fn emit_report_named(rows: &[ReportRow], format: &str) -> Result<Vec<u8>> {
    emit_report(rows, format.parse()?)
}

fn emit_csv(rows: &[ReportRow]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER)?;
    for r in rows {
        let s = &r.stats;
        w.write_record([
            r.object.clone(),
            r.grasp_height.to_string(),
            r.mode.label().to_string(),
            opt(s.roll.map(|m| m.mean)),
            opt(s.roll.map(|m| m.std)),
            opt(s.pitch.map(|m| m.mean)),
            opt(s.pitch.map(|m| m.std)),
            opt(s.all.map(|m| m.mean)),
            opt(s.all.map(|m| m.std)),
            s.count_lt_1deg.to_string(),
            s.count_lt_2deg.to_string(),
            s.topples.to_string(),
            s.trials.to_string(),
        ])?;
    }
    w.into_inner().map_err(|e| Error::Io(e.into_error()))
}

fn cell(m: Option<MeanStd>) -> String {
    m.map_or_else(|| "-".to_string(), |m| format!("{:.1}±{:.1}", m.mean, m.std))
}

fn emit_txt(rows: &[ReportRow]) -> String {
    let header = ["Object", "Grasp", "Mode", "Roll [deg]", "Pitch [deg]", "All [deg]", "< 1 deg", "< 2 deg", "Topples"];
    let body: Vec<[String; 9]> = rows
        .iter()
        .map(|r| {
            let s = &r.stats;
            [
                r.object.clone(),
                format!("{:.1} cm", r.grasp_height * 100.0),
                r.mode.label().to_string(),
                cell(s.roll),
                cell(s.pitch),
                cell(s.all),
                format!("{}/{}", s.count_lt_1deg, s.trials),
                format!("{}/{}", s.count_lt_2deg, s.trials),
                s.topples.to_string(),
            ]
        })
        .collect();
    let mut width = header.map(|h| h.chars().count());
    for row in &body {
        for (w, c) in width.iter_mut().zip(row) {
            *w = (*w).max(c.chars().count());
        }
    }
    let mut out = String::new();
    let line = |out: &mut String, cells: &[String]| {
        let padded: Vec<String> = cells
            .iter()
            .zip(&width)
            .map(|(c, w)| format!("{c}{}", " ".repeat(w - c.chars().count())))
            .collect();
        let _ = writeln!(out, "{}", padded.join("  ").trim_end());
    };
    line(&mut out, &header.map(String::from));
    line(&mut out, &width.map(|w| "-".repeat(w)));
    for row in &body {
        line(&mut out, row);
    }
    out
}

fn parse_opt(s: &str) -> Result<Option<f64>> {
    if s == "-" {
        return Ok(None);
    }
    s.parse().map(Some).map_err(|_| Error::InvalidConfig(format!("bad number `{s}` in report")))
}

fn parse_count(s: &str) -> Result<usize> {
    s.parse().map_err(|_| Error::InvalidConfig(format!("bad count `{s}` in report")))
}

fn pair(mean: Option<f64>, std: Option<f64>) -> Option<MeanStd> {
    Some(MeanStd { mean: mean?, std: std? })
}

/// Inverse of the CSV report.
pub fn parse_csv(bytes: &[u8]) -> Result<Vec<ReportRow>> {
    let mut r = csv::Reader::from_reader(bytes);
    let header: Vec<String> = r.headers()?.iter().map(String::from).collect();
    if header != CSV_HEADER {
        return Err(Error::InvalidConfig("unexpected report header".into()));
    }
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let f = |i: usize| rec.get(i).unwrap_or("");
        let mode = ControlMode::parse(f(2)).ok_or_else(|| Error::InvalidConfig(format!("bad mode `{}`", f(2))))?;
        let v: Vec<Option<f64>> = (3..9).map(|i| parse_opt(f(i))).collect::<Result<_>>()?;
        rows.push(ReportRow {
            object: f(0).to_string(),
            grasp_height: parse_opt(f(1))?.ok_or_else(|| Error::InvalidConfig("missing grasp height".into()))?,
            mode,
            stats: BatchStats {
                roll: pair(v[0], v[1]),
                pitch: pair(v[2], v[3]),
                all: pair(v[4], v[5]),
                count_lt_1deg: parse_count(f(9))?,
                count_lt_2deg: parse_count(f(10))?,
                topples: parse_count(f(11))?,
                trials: parse_count(f(12))?,
            },
        });
    }
    Ok(rows)
}
