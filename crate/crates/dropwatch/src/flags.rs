//! Per-point detection output.
//!
//! ```text
//! index,timestamp,prediction,actual,acc_flag,tail_likelihood,tail_flag,intersect_flag
//! ```
//!
//! `index` is the position in the ingested series, so label files written
//! against the same series line up without translation. Flags are `0`/`1`;
//! prediction and actual are in normalized units.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{fields, parse_error, read_text, records, write_file, Error, Result};

pub const HEADER: &str =
    "index,timestamp,prediction,actual,acc_flag,tail_likelihood,tail_flag,intersect_flag";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlagRow {
    pub index: usize,
    pub timestamp: i64,
    pub prediction: f64,
    pub actual: f64,
    pub acc_flag: bool,
    pub tail_likelihood: f64,
    pub tail_flag: bool,
    pub intersect_flag: bool,
}

pub fn format_flags(rows: &[FlagRow]) -> String {
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(HEADER);
    out.push('\n');
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.index,
            r.timestamp,
            r.prediction,
            r.actual,
            u8::from(r.acc_flag),
            r.tail_likelihood,
            u8::from(r.tail_flag),
            u8::from(r.intersect_flag),
        )
        .expect("writing to a String");
    }
    out
}

pub fn write_flags(path: &Path, rows: &[FlagRow]) -> Result<()> {
    write_file(path, format_flags(rows))
}

/// Parses a flags file and checks that indices are consecutive.
pub fn parse_flags(text: &str) -> Result<Vec<FlagRow>> {
    if text.lines().next().map(str::trim) != Some(HEADER) {
        return Err(parse_error(
            "flags",
            1,
            format!("expected header `{HEADER}`"),
        ));
    }
    let mut rows: Vec<FlagRow> = Vec::new();
    for rec in records(text, "flags", true, None) {
        let (line, rec) = rec?;
        let f: [&str; 8] = fields(&rec, "flags", line, HEADER)?;
        let err = |name: &str, v: &str| parse_error("flags", line, format!("bad {name} `{v}`"));
        let flag = |name: &str, v: &str| match v {
            "0" => Ok(false),
            "1" => Ok(true),
            _ => Err(err(name, v)),
        };
        let num = |name: &str, v: &str| v.parse::<f64>().map_err(|_| err(name, v));
        let row = FlagRow {
            index: f[0].parse().map_err(|_| err("index", f[0]))?,
            timestamp: f[1].parse().map_err(|_| err("timestamp", f[1]))?,
            prediction: num("prediction", f[2])?,
            actual: num("actual", f[3])?,
            acc_flag: flag("acc_flag", f[4])?,
            tail_likelihood: num("tail_likelihood", f[5])?,
            tail_flag: flag("tail_flag", f[6])?,
            intersect_flag: flag("intersect_flag", f[7])?,
        };
        if let Some(prev) = rows.last() {
            if row.index != prev.index + 1 {
                return Err(parse_error(
                    "flags",
                    line,
                    format!("index {} does not follow {}", row.index, prev.index),
                ));
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Mismatch("flags file has no rows".into()));
    }
    Ok(rows)
}

pub fn read_flags(path: &Path) -> Result<Vec<FlagRow>> {
    parse_flags(&read_text(path)?)
}

/// Indices that were interpolated during ingestion, one per line.
pub fn format_filled(indices: &[usize]) -> String {
    let mut out = String::new();
    for i in indices {
        writeln!(out, "{i}").expect("writing to a String");
    }
    out
}

pub fn parse_filled(text: &str) -> Result<Vec<usize>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            l.trim()
                .parse()
                .map_err(|_| parse_error("filled", i + 1, format!("bad index `{}`", l.trim())))
        })
        .collect()
}
