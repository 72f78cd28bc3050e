//! Line-delimited JSON helpers shared by every native file format.

use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::corpus::SCHEMA_VERSION;
use crate::error::{Error, Result};

pub(crate) fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Error::io(path, e))
}

/// Parses each non-blank line as `T`, yielding 1-based line numbers.
pub(crate) fn lines<T: DeserializeOwned>(
    reader: impl BufRead,
    label: &Path,
) -> impl Iterator<Item = Result<(usize, T)>> {
    let label: PathBuf = label.to_path_buf();
    reader
        .lines()
        .enumerate()
        .filter_map(move |(k, line)| {
            let line_no = k + 1;
            match line {
                Err(e) => Some(Err(Error::io(&label, e))),
                Ok(text) if text.trim().is_empty() => None,
                Ok(text) => Some(
                    serde_json::from_str::<T>(&text)
                        .map(|v| (line_no, v))
                        .map_err(|e| Error::parse(&label, line_no, e.to_string())),
                ),
            }
        })
}

pub(crate) fn check_version(found: Option<&str>, label: &Path, line: usize) -> Result<()> {
    match found {
        None | Some(SCHEMA_VERSION) => Ok(()),
        Some(v) => Err(Error::parse(
            label,
            line,
            format!("unsupported schema_version {v:?} (expected {SCHEMA_VERSION:?})"),
        )),
    }
}

pub(crate) fn write_line<T: Serialize>(out: &mut impl Write, value: &T) -> std::io::Result<()> {
    serde_json::to_writer(&mut *out, value)?;
    out.write_all(b"\n")
}
