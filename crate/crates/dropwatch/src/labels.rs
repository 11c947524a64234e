//! Ground-truth label files: `start_index,end_index` per line, inclusive.

use std::fmt::Write as _;
use std::path::Path;

use dropwatch_core::evaluation::LabeledRegions;

use crate::error::{fields, parse_error, read_text, records, write_file, Result};

pub fn parse_labels(text: &str) -> Result<LabeledRegions> {
    let mut spans = Vec::new();
    for rec in records(text, "labels", false, Some(b'#')) {
        let (line, rec) = rec?;
        let [a, b] = fields(&rec, "labels", line, "start_index,end_index")?;
        let parse = |s: &str| {
            s.parse::<usize>()
                .map_err(|e| parse_error("labels", line, format!("bad index `{s}`: {e}")))
        };
        spans.push((parse(a)?, parse(b)?));
    }
    Ok(LabeledRegions::new(spans)?)
}

pub fn read_labels(path: &Path) -> Result<LabeledRegions> {
    parse_labels(&read_text(path)?)
}

pub fn format_labels(labels: &LabeledRegions) -> String {
    let mut out = String::new();
    for (s, e) in labels.spans() {
        writeln!(out, "{s},{e}").expect("writing to a String");
    }
    out
}

pub fn write_labels(path: &Path, labels: &LabeledRegions) -> Result<()> {
    write_file(path, format_labels(labels))
}

/// `data.csv` -> `data.labels.csv`, next to the data file.
pub fn sibling_path(path: &Path, suffix: &str) -> std::path::PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    path.with_file_name(format!("{stem}.{suffix}.csv"))
}
