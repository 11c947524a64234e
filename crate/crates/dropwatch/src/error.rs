use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] dropwatch_core::Error),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{what} line {line}: {message}")]
    Parse {
        what: &'static str,
        line: usize,
        message: String,
    },
    #[error("config key `{key}`: {message}")]
    Config { key: String, message: String },
    #[error("model file: {0}")]
    ModelFormat(String),
    #[error("{0}")]
    Mismatch(String),
    #[error("report: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn parse_error(what: &'static str, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        what,
        line,
        message: message.into(),
    }
}

pub(crate) fn read_text(path: &std::path::Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub(crate) fn write_file(path: &std::path::Path, contents: impl AsRef<[u8]>) -> Result<()> {
    std::fs::write(path, contents).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Records of a comma-separated text with the 1-based line each starts on.
/// Fields are trimmed; empty lines are skipped.
pub(crate) fn records<'a>(
    text: &'a str,
    what: &'static str,
    header: bool,
    comment: Option<u8>,
) -> impl Iterator<Item = Result<(usize, csv::StringRecord)>> + 'a {
    let reader = csv::ReaderBuilder::new()
        .has_headers(header)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(comment)
        .from_reader(text.as_bytes());
    // The reader's own line count ignores skipped blank lines, and a record's
    // byte offset can point at the blank or comment lines before it. Walk
    // forward from the offset to the record's first byte instead.
    let bytes = text.as_bytes();
    let mut cursor = (0usize, 1usize);
    let mut line_of = move |pos: Option<&csv::Position>| {
        let Some(p) = pos else { return 0 };
        let mut at = (p.byte() as usize).min(bytes.len());
        loop {
            while at < bytes.len() && (bytes[at] == b'\r' || bytes[at] == b'\n') {
                at += 1;
            }
            if at < bytes.len() && comment == Some(bytes[at]) {
                while at < bytes.len() && bytes[at] != b'\n' {
                    at += 1;
                }
            } else {
                break;
            }
        }
        let (from, line) = if at >= cursor.0 { cursor } else { (0, 1) };
        let line = line + bytes[from..at].iter().filter(|&&b| b == b'\n').count();
        cursor = (at, line);
        line
    };
    reader.into_records().map(move |r| match r {
        Ok(rec) => Ok((line_of(rec.position()), rec)),
        Err(e) => Err(parse_error(what, line_of(e.position()), e.to_string())),
    })
}

/// Exactly `N` fields of a record.
pub(crate) fn fields<'r, const N: usize>(
    rec: &'r csv::StringRecord,
    what: &'static str,
    line: usize,
    expected: &str,
) -> Result<[&'r str; N]> {
    let v: Vec<&str> = rec.iter().collect();
    v.try_into().map_err(|v: Vec<&str>| {
        parse_error(
            what,
            line,
            format!("expected `{expected}`, got {} field(s)", v.len()),
        )
    })
}
