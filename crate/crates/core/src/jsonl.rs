//! Line-delimited JSON persistence for cases, decision records, and trial
//! logs. One record per line; serialization follows struct field order, so
//! identical runs produce byte-identical files.

use serde::de::DeserializeOwned;
use serde::Serialize;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum JsonlError {
    #[error("io error at {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error at {path}:{line}: {source}")]
    Parse {
        path: String,
        line: usize,
        #[source]
        source: serde_json::Error,
    },
}

/// Serialize records one per line.
pub fn to_string<T: Serialize>(items: &[T]) -> String {
    let mut out = String::new();
    for item in items {
        out.push_str(&serde_json::to_string(item).expect("record serializes"));
        out.push('\n');
    }
    out
}

/// Write records to a file, one per line.
pub fn write_file<T: Serialize>(path: &Path, items: &[T]) -> Result<(), JsonlError> {
    let mut file = std::fs::File::create(path)
        .map_err(|source| JsonlError::Io { path: path.display().to_string(), source })?;
    file.write_all(to_string(items).as_bytes())
        .map_err(|source| JsonlError::Io { path: path.display().to_string(), source })?;
    Ok(())
}

/// Read records from a line-delimited file.
pub fn read_file<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>, JsonlError> {
    let file = std::fs::File::open(path)
        .map_err(|source| JsonlError::Io { path: path.display().to_string(), source })?;
    let reader = BufReader::new(file);
    let mut items = Vec::new();
    for (index, line) in reader.lines().enumerate() {
        let line = line.map_err(|source| JsonlError::Io { path: path.display().to_string(), source })?;
        if line.trim().is_empty() {
            continue;
        }
        let item = serde_json::from_str(&line).map_err(|source| JsonlError::Parse {
            path: path.display().to_string(),
            line: index + 1,
            source,
        })?;
        items.push(item);
    }
    Ok(items)
}
