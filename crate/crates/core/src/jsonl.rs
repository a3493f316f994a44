//! Line-oriented file helpers for pair records and other JSONL artifacts.

use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{Error, RecordError, Result};
use crate::model::McqPair;

/// One line of a pair file that failed structural decoding.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BadLine {
    pub line: usize,
    pub error: RecordError,
}

fn lines(path: &Path) -> Result<impl Iterator<Item = (usize, std::io::Result<String>)>> {
    let file = File::open(path)?;
    Ok(BufReader::new(file)
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l)))
}

/// Read a pair file, failing on the first malformed or invalid record.
pub fn read_pairs(path: &Path) -> Result<Vec<McqPair>> {
    let mut out = Vec::new();
    for (line, text) in lines(path)? {
        let text = text?;
        if text.trim().is_empty() {
            continue;
        }
        let pair = McqPair::from_record(&text).map_err(|source| Error::Line {
            path: path.display().to_string(),
            line,
            source,
        })?;
        out.push(pair);
    }
    Ok(out)
}

/// Read a pair file keeping structurally decodable records even when they
/// violate invariants; undecodable lines are returned separately.
pub fn read_pairs_lenient(path: &Path) -> Result<(Vec<McqPair>, Vec<BadLine>)> {
    let mut pairs = Vec::new();
    let mut bad = Vec::new();
    for (line, text) in lines(path)? {
        let text = text?;
        if text.trim().is_empty() {
            continue;
        }
        match McqPair::decode_record(&text) {
            Ok(p) => pairs.push(p),
            Err(error) => bad.push(BadLine { line, error }),
        }
    }
    Ok((pairs, bad))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    Ok(BufWriter::new(File::create(path)?))
}

pub fn write_pairs<'a>(path: &Path, pairs: impl IntoIterator<Item = &'a McqPair>) -> Result<usize> {
    let mut w = create(path)?;
    let mut n = 0;
    for p in pairs {
        w.write_all(p.to_record().as_bytes())?;
        w.write_all(b"\n")?;
        n += 1;
    }
    w.flush()?;
    Ok(n)
}

pub fn write_jsonl<'a, T: Serialize + 'a>(
    path: &Path,
    items: impl IntoIterator<Item = &'a T>,
) -> Result<usize> {
    let mut w = create(path)?;
    let mut n = 0;
    for item in items {
        serde_json::to_writer(&mut w, item)?;
        w.write_all(b"\n")?;
        n += 1;
    }
    w.flush()?;
    Ok(n)
}

pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let mut out = Vec::new();
    for (line, text) in lines(path)? {
        let text = text?;
        if text.trim().is_empty() {
            continue;
        }
        let item = serde_json::from_str(&text).map_err(|e| Error::Line {
            path: path.display().to_string(),
            line,
            source: RecordError::new("$", e.to_string()),
        })?;
        out.push(item);
    }
    Ok(out)
}

/// Pretty-printed JSON document with a trailing newline.
pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}
