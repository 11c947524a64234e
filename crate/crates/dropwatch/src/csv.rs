//! `timestamp,value` series files.
//!
//! UTF-8, one record per line, `.` as decimal separator, LF or CRLF. An
//! optional single header line can be skipped. Blank lines are ignored.

use std::fmt::Write as _;
use std::path::Path;

use dropwatch_core::series::{IntervalPolicy, RawPoint, Series};

use crate::error::{fields, parse_error, read_text, records, write_file, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CsvOptions {
    pub header: bool,
    pub interval: IntervalPolicy,
}

/// Parses records and places them on a uniform grid (gaps interpolated).
pub fn parse_series(text: &str, opts: CsvOptions) -> Result<Series> {
    let mut points = Vec::new();
    for rec in records(text, "series", opts.header, None) {
        let (line, rec) = rec?;
        let [ts, value] = fields(&rec, "series", line, "timestamp,value")?;
        let timestamp = ts
            .parse::<i64>()
            .map_err(|e| parse_error("series", line, format!("bad timestamp `{ts}`: {e}")))?;
        let value = value
            .parse::<f64>()
            .map_err(|e| parse_error("series", line, format!("bad value `{value}`: {e}")))?;
        if !value.is_finite() {
            return Err(parse_error("series", line, "value must be finite"));
        }
        points.push(RawPoint::new(timestamp, value));
    }
    Ok(Series::from_points(&points, opts.interval)?)
}

pub fn read_series(path: &Path, opts: CsvOptions) -> Result<Series> {
    parse_series(&read_text(path)?, opts)
}

/// One `timestamp,value` line per point. Floats use the shortest
/// representation that parses back to the same bits.
pub fn format_series(series: &Series) -> String {
    let mut out = String::with_capacity(series.len() * 24);
    for (t, v) in series.timestamps().zip(series.values()) {
        writeln!(out, "{t},{v}").expect("writing to a String");
    }
    out
}

pub fn write_series(path: &Path, series: &Series) -> Result<()> {
    write_file(path, format_series(series))
}
