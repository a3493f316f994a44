use std::collections::BTreeMap;
use std::fmt;

use serde_json::Value;

use super::prompt::{BLOCK_CLOSE, BLOCK_OPEN};
use crate::error::RecordError;
use crate::model::{decode_choices, decode_explanations, parse_label_field, Label, McqPair};

/// Why a provider response could not be turned into pairs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenerationParseError {
    /// 1-based record index within the block, when the error is per-record.
    pub record: Option<usize>,
    /// 1-based line within the response.
    pub line: Option<usize>,
    pub path: String,
    pub message: String,
}

impl GenerationParseError {
    fn block(message: impl Into<String>) -> Self {
        GenerationParseError {
            record: None,
            line: None,
            path: "block".into(),
            message: message.into(),
        }
    }

    fn at(record: usize, line: usize, err: RecordError) -> Self {
        GenerationParseError {
            record: Some(record),
            line: Some(line),
            path: err.path,
            message: err.message,
        }
    }
}

impl fmt::Display for GenerationParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let (Some(r), Some(l)) = (self.record, self.line) {
            write!(f, "record {r} (line {l}): ")?;
        }
        write!(f, "{}: {}", self.path, self.message)
    }
}

impl std::error::Error for GenerationParseError {}

const ALLOWED: [&str; 6] = [
    "answer",
    "choices",
    "explanations",
    "question",
    "rephrase",
    "subdomain",
];

fn parse_record(value: &Value) -> Result<McqPair, RecordError> {
    let obj = value
        .as_object()
        .ok_or_else(|| RecordError::new("$", "expected a JSON object"))?;
    if let Some(unknown) = obj.keys().find(|k| !ALLOWED.contains(&k.as_str())) {
        return Err(RecordError::new(unknown.clone(), "unknown field"));
    }
    let question = match obj.get("question") {
        Some(Value::String(s)) => s.clone(),
        Some(_) => return Err(RecordError::new("question", "expected a string")),
        None => return Err(RecordError::new("question", "missing field")),
    };
    let choices = decode_choices(obj.get("choices"))?;
    let answer = parse_label_field(obj.get("answer"), "answer")?;
    let rephrase = match obj.get("rephrase") {
        Some(Value::String(s)) if !s.trim().is_empty() => s.clone(),
        Some(Value::String(_)) => return Err(RecordError::new("rephrase", "empty")),
        Some(_) => return Err(RecordError::new("rephrase", "expected a string")),
        None => return Err(RecordError::new("rephrase", "missing field")),
    };
    let explanations: BTreeMap<Label, String> = decode_explanations(obj.get("explanations"))?
        .ok_or_else(|| RecordError::new("explanations", "missing field"))?;
    for label in Label::ALL {
        match explanations.get(&label) {
            None => {
                return Err(RecordError::new(
                    format!("explanations.{label}"),
                    "missing explanation",
                ))
            }
            Some(t) if t.trim().is_empty() => {
                return Err(RecordError::new(format!("explanations.{label}"), "empty"))
            }
            Some(_) => {}
        }
    }
    let subdomain = match obj.get("subdomain") {
        Some(Value::String(s)) => Some(s.clone()),
        _ => None,
    };
    let mut pair = McqPair {
        id: String::new(),
        question,
        choices,
        answer,
        rephrase: Some(rephrase),
        explanations: Some(explanations),
        subdomain: None,
        source: None,
    };
    pair.refresh_id();
    if let Some(issue) = pair.issues().into_iter().next() {
        return Err(RecordError::new(issue.path, issue.message));
    }
    Ok(match subdomain {
        Some(s) => pair.with_subdomain(s),
        None => pair,
    })
}

/// Parse a provider response. Exactly one ```` ```rac ```` block must be
/// present; each non-blank line inside it is one RaC-complete pair.
pub fn parse_generation(
    response: &str,
    expected_count: usize,
) -> Result<Vec<McqPair>, GenerationParseError> {
    let lines: Vec<&str> = response.lines().collect();
    let opens: Vec<usize> = lines
        .iter()
        .enumerate()
        .filter(|(_, l)| l.trim() == BLOCK_OPEN)
        .map(|(i, _)| i)
        .collect();
    let open = match opens.as_slice() {
        [] => {
            return Err(GenerationParseError::block(format!(
                "malformed block: no {BLOCK_OPEN} fenced block found"
            )))
        }
        [one] => *one,
        _ => {
            return Err(GenerationParseError::block(format!(
                "malformed block: {} {BLOCK_OPEN} blocks found, expected one",
                opens.len()
            )))
        }
    };
    let close = lines[open + 1..]
        .iter()
        .position(|l| l.trim() == BLOCK_CLOSE)
        .map(|p| open + 1 + p)
        .ok_or_else(|| {
            GenerationParseError::block(format!(
                "malformed block: opened on line {} but never closed",
                open + 1
            ))
        })?;

    let mut pairs = Vec::new();
    for (idx, text) in lines.iter().enumerate().take(close).skip(open + 1) {
        if text.trim().is_empty() {
            continue;
        }
        let record = pairs.len() + 1;
        let line = idx + 1;
        let value: Value = serde_json::from_str(text.trim()).map_err(|e| {
            GenerationParseError::at(record, line, RecordError::new("$", format!("malformed JSON: {e}")))
        })?;
        let pair = parse_record(&value).map_err(|e| GenerationParseError::at(record, line, e))?;
        pairs.push(pair);
    }

    if pairs.len() != expected_count {
        return Err(GenerationParseError::block(format!(
            "count mismatch: got {}, expected {expected_count}",
            pairs.len()
        )));
    }
    Ok(pairs)
}
