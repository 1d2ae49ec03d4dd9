//! Helpers for line-delimited JSON files: one object per line, UTF-8, `\n`.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;
use thiserror::Error;

/// Errors raised while reading or writing JSONL files.
#[derive(Debug, Error)]
pub enum JsonlError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {source}")]
    Parse {
        path: String,
        line: usize,
        #[source]
        source: serde_json::Error,
    },
}

impl JsonlError {
    fn io(path: &Path, source: std::io::Error) -> Self {
        JsonlError::Io { path: path.display().to_string(), source }
    }
}

/// Reads every non-blank line of `path` as a `T`, reporting the 1-based line
/// number of the first malformed one.
pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>, JsonlError> {
    let file = File::open(path).map_err(|e| JsonlError::io(path, e))?;
    let mut items = Vec::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| JsonlError::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let item = serde_json::from_str(&line).map_err(|source| JsonlError::Parse {
            path: path.display().to_string(),
            line: idx + 1,
            source,
        })?;
        items.push(item);
    }
    Ok(items)
}

/// Writes `items` to `path` as compact JSON, one object per line.
pub fn write_jsonl<T: Serialize>(
    path: &Path,
    items: impl IntoIterator<Item = T>,
) -> Result<(), JsonlError> {
    let file = File::create(path).map_err(|e| JsonlError::io(path, e))?;
    let mut w = BufWriter::new(file);
    for item in items {
        let line = serde_json::to_string(&item).map_err(|source| JsonlError::Parse {
            path: path.display().to_string(),
            line: 0,
            source,
        })?;
        w.write_all(line.as_bytes()).map_err(|e| JsonlError::io(path, e))?;
        w.write_all(b"\n").map_err(|e| JsonlError::io(path, e))?;
    }
    w.flush().map_err(|e| JsonlError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde::Deserialize;

    #[derive(Debug, PartialEq, Serialize, Deserialize)]
    struct Row {
        id: u32,
        name: String,
    }

    #[test]
    fn round_trips_and_skips_blank_lines() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("rows.jsonl");
        let rows = vec![
            Row { id: 1, name: "a".into() },
            Row { id: 2, name: "b".into() },
        ];
        write_jsonl(&path, &rows).unwrap();
        let raw = std::fs::read_to_string(&path).unwrap();
        assert_eq!(raw, "{\"id\":1,\"name\":\"a\"}\n{\"id\":2,\"name\":\"b\"}\n");
        std::fs::write(&path, format!("\n{raw}\n")).unwrap();
        let back: Vec<Row> = read_jsonl(&path).unwrap();
        assert_eq!(back, rows);
    }

    #[test]
    fn reports_line_numbers_for_bad_rows() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("rows.jsonl");
        std::fs::write(&path, "{\"id\":1,\"name\":\"a\"}\nnot json\n").unwrap();
        match read_jsonl::<Row>(&path) {
            Err(JsonlError::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
    }
}
