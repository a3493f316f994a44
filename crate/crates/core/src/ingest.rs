//! Cleaning and section segmentation of extracted book text.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_BUDGET: usize = 3000;
pub const MIN_BUDGET: usize = 64;

/// Extracted text of one book, with markdown `#` headings marking sections.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawDocument {
    pub book_id: String,
    pub text: String,
    pub title: Option<String>,
    pub edition: Option<String>,
}

impl RawDocument {
    pub fn new(book_id: impl Into<String>, text: impl Into<String>) -> Self {
        RawDocument {
            book_id: book_id.into(),
            text: text.into(),
            title: None,
            edition: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusSegment {
    pub book_id: String,
    pub section_path: Vec<String>,
    pub text: String,
    pub token_estimate: usize,
}

impl CorpusSegment {
    pub fn new(book_id: impl Into<String>, section_path: Vec<String>, text: impl Into<String>) -> Self {
        let text = text.into();
        CorpusSegment {
            book_id: book_id.into(),
            section_path,
            token_estimate: estimate_tokens(&text),
            text,
        }
    }
}

/// Rough token count: one token per four characters, rounded up.
/// This is a budgeting heuristic, not a tokenizer.
pub fn estimate_tokens(text: &str) -> usize {
    text.chars().count().div_ceil(4)
}

static DEFAULT_CAPTION: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?i)^\s*(?:figure|fig\.|table)\s*\d").unwrap());

static IMAGE_MARKERS: LazyLock<Vec<Regex>> = LazyLock::new(|| {
    [
        r"!\[[^\]]*\]\([^)]*\)",
        r"(?i)<img\b[^>]*>",
        r"(?i)\[(?:image|figure|img|picture)\b[^\]]*\]",
    ]
    .iter()
    .map(|p| Regex::new(p).unwrap())
    .collect()
});

static HEADING: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"^(#{1,6})[ \t]+(.*?)[ \t#]*$").unwrap());

static PARAGRAPH_BREAK: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"\n[ \t]*\n\s*").unwrap());

static SENTENCE_END: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r#"[.!?]["')\]]*\s+"#).unwrap());

/// Line filters applied before segmentation.
#[derive(Debug, Clone)]
pub struct Cleaner {
    caption_patterns: Vec<Regex>,
}

impl Default for Cleaner {
    fn default() -> Self {
        Cleaner {
            caption_patterns: vec![DEFAULT_CAPTION.clone()],
        }
    }
}

impl Cleaner {
    /// Replace the caption rules; each pattern is matched against whole lines.
    pub fn with_caption_patterns<I, S>(patterns: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let caption_patterns = patterns
            .into_iter()
            .map(|p| {
                Regex::new(p.as_ref())
                    .map_err(|e| Error::Config(format!("bad caption pattern {:?}: {e}", p.as_ref())))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Cleaner { caption_patterns })
    }

    pub fn clean(&self, raw: &str) -> String {
        let stripped: String = raw
            .chars()
            .filter(|&c| !c.is_control() || c == '\n' || c == '\t')
            .collect();

        let mut kept: Vec<String> = Vec::new();
        for line in stripped.split('\n') {
            if self.caption_patterns.iter().any(|re| re.is_match(line)) {
                continue;
            }
            let mut out = line.to_string();
            for re in IMAGE_MARKERS.iter() {
                if re.is_match(&out) {
                    out = re.replace_all(&out, "").into_owned();
                }
            }
            if out.trim().is_empty() && !line.trim().is_empty() {
                // the line held nothing but image markers
                continue;
            }
            kept.push(out);
        }

        let mut result: Vec<String> = Vec::with_capacity(kept.len());
        let mut i = 0;
        while i < kept.len() {
            if kept[i].trim().is_empty() {
                let start = i;
                while i < kept.len() && kept[i].trim().is_empty() {
                    i += 1;
                }
                let run = i - start;
                if run >= 3 {
                    result.push(String::new());
                } else {
                    result.extend(kept[start..i].iter().cloned());
                }
            } else {
                result.push(kept[i].clone());
                i += 1;
            }
        }
        result.join("\n")
    }
}

pub fn clean_text(raw: &str) -> String {
    Cleaner::default().clean(raw)
}

/// A heading-delimited section of cleaned text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Section {
    pub path: Vec<String>,
    pub body: String,
}

/// Split cleaned text into sections at markdown headings. Text before the
/// first heading forms a section with an empty path.
pub fn sections(cleaned: &str) -> Vec<Section> {
    let mut out = Vec::new();
    let mut stack: Vec<(usize, String)> = Vec::new();
    let mut body: Vec<&str> = Vec::new();
    let path_of = |stack: &[(usize, String)]| stack.iter().map(|(_, t)| t.clone()).collect();

    let mut current_path: Vec<String> = Vec::new();
    for line in cleaned.split('\n') {
        if let Some(caps) = HEADING.captures(line) {
            out.push(Section {
                path: current_path,
                body: body.join("\n").trim().to_string(),
            });
            body.clear();
            let level = caps[1].len();
            while stack.last().is_some_and(|(l, _)| *l >= level) {
                stack.pop();
            }
            stack.push((level, caps[2].to_string()));
            current_path = path_of(&stack);
        } else {
            body.push(line);
        }
    }
    out.push(Section {
        path: current_path,
        body: body.join("\n").trim().to_string(),
    });
    out
}

/// Cut `text` into consecutive slices ending right after each match of `re`.
fn split_after<'a>(text: &'a str, re: &Regex) -> Vec<&'a str> {
    let mut pieces = Vec::new();
    let mut start = 0;
    for m in re.find_iter(text) {
        pieces.push(&text[start..m.end()]);
        start = m.end();
    }
    if start < text.len() {
        pieces.push(&text[start..]);
    }
    pieces
}

fn hard_split(text: &str, max_chars: usize) -> Vec<&str> {
    let mut pieces = Vec::new();
    let mut start = 0;
    let mut count = 0;
    for (idx, _) in text.char_indices() {
        if count == max_chars {
            pieces.push(&text[start..idx]);
            start = idx;
            count = 0;
        }
        count += 1;
    }
    if start < text.len() {
        pieces.push(&text[start..]);
    }
    pieces
}

/// Split a section body into slices of at most `max_chars` characters.
/// Slices concatenate back to `body` exactly.
pub fn pack_body(body: &str, max_chars: usize) -> Vec<String> {
    let mut atoms: Vec<&str> = Vec::new();
    for para in split_after(body, &PARAGRAPH_BREAK) {
        if para.chars().count() <= max_chars {
            atoms.push(para);
            continue;
        }
        for sentence in split_after(para, &SENTENCE_END) {
            if sentence.chars().count() <= max_chars {
                atoms.push(sentence);
            } else {
                atoms.extend(hard_split(sentence, max_chars));
            }
        }
    }

    let mut pieces = Vec::new();
    let mut current = String::new();
    let mut current_chars = 0;
    for atom in atoms {
        let n = atom.chars().count();
        if current_chars + n > max_chars && !current.is_empty() {
            pieces.push(std::mem::take(&mut current));
            current_chars = 0;
        }
        current.push_str(atom);
        current_chars += n;
    }
    if !current.is_empty() {
        pieces.push(current);
    }
    pieces
}

/// Clean a document and cut it into section-scoped segments whose token
/// estimate never exceeds `budget`.
pub fn segment(doc: &RawDocument, budget: usize) -> Result<Vec<CorpusSegment>> {
    segment_with(doc, budget, &Cleaner::default())
}

pub fn segment_with(doc: &RawDocument, budget: usize, cleaner: &Cleaner) -> Result<Vec<CorpusSegment>> {
    if budget < MIN_BUDGET {
        return Err(Error::Config(format!(
            "segment budget {budget} is below the minimum of {MIN_BUDGET}"
        )));
    }
    let cleaned = cleaner.clean(&doc.text);
    let max_chars = budget * 4;
    let mut out = Vec::new();
    for section in sections(&cleaned) {
        if section.body.is_empty() {
            continue;
        }
        for piece in pack_body(&section.body, max_chars) {
            out.push(CorpusSegment::new(&doc.book_id, section.path.clone(), piece));
        }
    }
    Ok(out)
}

/// Read a corpus manifest (`{"file.txt": "book_id", ..}`, paths relative to
/// the manifest) and segment every listed book in filename order.
pub fn ingest_manifest(manifest: &Path, budget: usize, cleaner: &Cleaner) -> Result<Vec<CorpusSegment>> {
    let text = std::fs::read_to_string(manifest)?;
    let books: BTreeMap<String, String> = serde_json::from_str(&text)
        .map_err(|e| Error::Config(format!("manifest {}: {e}", manifest.display())))?;
    let base = manifest.parent().unwrap_or_else(|| Path::new("."));
    let mut out = Vec::new();
    for (file, book_id) in books {
        let path = base.join(&file);
        let text = std::fs::read_to_string(&path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        out.extend(segment_with(&RawDocument::new(book_id, text), budget, cleaner)?);
    }
    Ok(out)
}
