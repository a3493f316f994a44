//! Canonical domain types and the pair record format.
//!
//! A pair record is one JSON object per line with exactly these keys, always
//! written in sorted order:
//!
//! ```text
//! {"answer":"B","choices":{"A":..,"B":..,"C":..,"D":..},"explanations":{..}|null,
//!  "id":"<sha256 hex>","question":..,"rephrase":..|null,
//!  "source":{"batch_id":..,"book_id":..,"section_path":[..]}|null,"subdomain":..|null}
//! ```

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Index, IndexMut};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use crate::error::{Error, RecordError};

/// Position of an option in a four-way multiple-choice question.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Label {
    A,
    B,
    C,
    D,
}

impl Label {
    pub const ALL: [Label; 4] = [Label::A, Label::B, Label::C, Label::D];

    pub const fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(index: usize) -> Option<Label> {
        Self::ALL.get(index).copied()
    }

    pub const fn as_str(self) -> &'static str {
        match self {
            Label::A => "A",
            Label::B => "B",
            Label::C => "C",
            Label::D => "D",
        }
    }

    pub fn as_char(self) -> char {
        (b'A' + self as u8) as char
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown label {0:?}, expected one of A, B, C, D")]
pub struct UnknownLabel(pub String);

impl FromStr for Label {
    type Err = UnknownLabel;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "A" => Ok(Label::A),
            "B" => Ok(Label::B),
            "C" => Ok(Label::C),
            "D" => Ok(Label::D),
            other => Err(UnknownLabel(other.to_string())),
        }
    }
}

/// The four option texts, indexed by [`Label`].
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Choices(pub [String; 4]);

impl Choices {
    pub fn new(a: impl Into<String>, b: impl Into<String>, c: impl Into<String>, d: impl Into<String>) -> Self {
        Choices([a.into(), b.into(), c.into(), d.into()])
    }

    pub fn iter(&self) -> impl Iterator<Item = (Label, &str)> {
        Label::ALL.into_iter().map(move |l| (l, self.0[l.index()].as_str()))
    }

    pub fn as_array(&self) -> &[String; 4] {
        &self.0
    }
}

impl Index<Label> for Choices {
    type Output = String;
    fn index(&self, label: Label) -> &String {
        &self.0[label.index()]
    }
}

impl IndexMut<Label> for Choices {
    fn index_mut(&mut self, label: Label) -> &mut String {
        &mut self.0[label.index()]
    }
}

/// Where a pair came from. Manually collected items carry no source.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct Source {
    pub book_id: String,
    pub section_path: Vec<String>,
    pub batch_id: String,
}

/// One multiple-choice question, optionally carrying its RaC annotation
/// (a rephrase plus one explanation per option).
///
/// Fields are public so that data read from disk can be held and reported on
/// even when it breaks an invariant; [`McqPair::issues`] lists what is wrong
/// and [`McqPair::new`] refuses to build an invalid value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct McqPair {
    pub id: String,
    pub question: String,
    pub choices: Choices,
    pub answer: Label,
    pub rephrase: Option<String>,
    pub explanations: Option<BTreeMap<Label, String>>,
    pub subdomain: Option<String>,
    pub source: Option<Source>,
}

/// A single invariant violation on a pair, addressed by field path.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Issue {
    pub pair_id: String,
    pub path: String,
    pub message: String,
}

impl Issue {
    pub fn new(pair_id: &str, path: impl Into<String>, message: impl Into<String>) -> Self {
        Issue {
            pair_id: pair_id.to_string(),
            path: path.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

/// Trim, collapse internal whitespace, and case-fold.
pub fn normalize_text(text: &str) -> String {
    text.split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
        .to_lowercase()
}

/// Content hash over question, choices in label order, and the correct label.
///
/// The hash input is the canonical JSON object
/// `{"answer":..,"choices":{"A":..,..},"question":..}` with sorted keys.
pub fn content_id(question: &str, choices: &Choices, answer: Label) -> String {
    let mut choice_map = Map::new();
    for (label, text) in choices.iter() {
        choice_map.insert(label.to_string(), Value::String(text.to_string()));
    }
    let mut obj = Map::new();
    obj.insert("answer".into(), Value::String(answer.to_string()));
    obj.insert("choices".into(), Value::Object(choice_map));
    obj.insert("question".into(), Value::String(question.to_string()));
    let canonical = Value::Object(obj).to_string();
    hex::encode(Sha256::digest(canonical.as_bytes()))
}

impl McqPair {
    /// Build a pair, computing its id and checking every invariant.
    pub fn new(
        question: impl Into<String>,
        choices: Choices,
        answer: Label,
        rephrase: Option<String>,
        explanations: Option<BTreeMap<Label, String>>,
    ) -> Result<Self, Error> {
        let question = question.into();
        let id = content_id(&question, &choices, answer);
        let pair = McqPair {
            id,
            question,
            choices,
            answer,
            rephrase,
            explanations,
            subdomain: None,
            source: None,
        };
        pair.ensure_valid()?;
        Ok(pair)
    }

    pub fn with_subdomain(mut self, subdomain: impl Into<String>) -> Self {
        self.subdomain = Some(subdomain.into());
        self
    }

    pub fn with_source(mut self, source: Source) -> Self {
        self.source = Some(source);
        self
    }

    pub fn compute_id(&self) -> String {
        content_id(&self.question, &self.choices, self.answer)
    }

    /// Recompute and store the id from the current content.
    pub fn refresh_id(&mut self) {
        self.id = self.compute_id();
    }

    pub fn correct_text(&self) -> &str {
        &self.choices[self.answer]
    }

    /// Rephrase and all four explanations present and non-empty.
    pub fn is_rac_complete(&self) -> bool {
        self.rephrase.as_deref().is_some_and(|r| !r.trim().is_empty())
            && self.explanations.as_ref().is_some_and(|e| {
                Label::ALL
                    .iter()
                    .all(|l| e.get(l).is_some_and(|t| !t.trim().is_empty()))
            })
    }

    /// Every core invariant violation, in a fixed order.
    pub fn issues(&self) -> Vec<Issue> {
        let mut issues = Vec::new();
        let id = self.id.as_str();
        if self.question.trim().is_empty() {
            issues.push(Issue::new(id, "question", "empty"));
        }
        for (label, text) in self.choices.iter() {
            if text.trim().is_empty() {
                issues.push(Issue::new(id, format!("choices.{label}"), "empty"));
            }
        }
        let normalized: Vec<String> = self.choices.0.iter().map(|c| normalize_text(c)).collect();
        for i in 0..4 {
            for j in (i + 1)..4 {
                if !normalized[i].is_empty() && normalized[i] == normalized[j] {
                    issues.push(Issue::new(
                        id,
                        "choices",
                        format!("duplicate {}/{}", Label::ALL[i], Label::ALL[j]),
                    ));
                }
            }
        }
        match (&self.rephrase, &self.explanations) {
            (None, None) => {}
            (Some(_), None) => {
                issues.push(Issue::new(id, "explanations", "incomplete (missing A, B, C, D)"));
            }
            (None, Some(_)) => {
                issues.push(Issue::new(id, "rephrase", "missing while explanations are present"));
            }
            (Some(rephrase), Some(expl)) => {
                if rephrase.trim().is_empty() {
                    issues.push(Issue::new(id, "rephrase", "empty"));
                }
                let missing: Vec<&str> = Label::ALL
                    .iter()
                    .filter(|l| !expl.contains_key(l))
                    .map(|l| l.as_str())
                    .collect();
                if !missing.is_empty() {
                    issues.push(Issue::new(
                        id,
                        "explanations",
                        format!("incomplete (missing {})", missing.join(", ")),
                    ));
                }
                for (label, text) in expl {
                    if text.trim().is_empty() {
                        issues.push(Issue::new(id, format!("explanations.{label}"), "empty"));
                    }
                }
            }
        }
        if self.id != self.compute_id() {
            issues.push(Issue::new(id, "id", "does not match content hash"));
        }
        issues
    }

    pub fn ensure_valid(&self) -> Result<(), Error> {
        match self.issues().into_iter().next() {
            None => Ok(()),
            Some(issue) => Err(Error::Validation(issue.to_string())),
        }
    }

    /// Canonical record as a JSON value (sorted keys).
    pub fn to_value(&self) -> Value {
        let mut obj = Map::new();
        obj.insert("answer".into(), Value::String(self.answer.to_string()));
        obj.insert("choices".into(), label_map_value(self.choices.iter()));
        obj.insert(
            "explanations".into(),
            match &self.explanations {
                Some(e) => label_map_value(e.iter().map(|(l, t)| (*l, t.as_str()))),
                None => Value::Null,
            },
        );
        obj.insert("id".into(), Value::String(self.id.clone()));
        obj.insert("question".into(), Value::String(self.question.clone()));
        obj.insert("rephrase".into(), opt_string(&self.rephrase));
        obj.insert(
            "source".into(),
            match &self.source {
                Some(s) => serde_json::to_value(s).expect("source serializes"),
                None => Value::Null,
            },
        );
        obj.insert("subdomain".into(), opt_string(&self.subdomain));
        Value::Object(obj)
    }

    /// Byte-stable single-line record.
    pub fn to_record(&self) -> String {
        self.to_value().to_string()
    }

    /// Parse a record and require every invariant to hold.
    pub fn from_record(text: &str) -> Result<Self, RecordError> {
        let pair = Self::decode_record(text)?;
        if let Some(issue) = pair.issues().into_iter().next() {
            return Err(RecordError::new(issue.path, issue.message));
        }
        Ok(pair)
    }

    /// Structural decode only: the schema must match, but invariants such as
    /// choice distinctness or id consistency are left for [`McqPair::issues`].
    pub fn decode_record(text: &str) -> Result<Self, RecordError> {
        let value: Value =
            serde_json::from_str(text).map_err(|e| RecordError::new("$", format!("malformed record: {e}")))?;
        Self::decode_value(&value)
    }

    pub fn decode_value(value: &Value) -> Result<Self, RecordError> {
        let obj = value
            .as_object()
            .ok_or_else(|| RecordError::new("$", "expected a JSON object"))?;
        const FIELDS: [&str; 8] = [
            "answer",
            "choices",
            "explanations",
            "id",
            "question",
            "rephrase",
            "source",
            "subdomain",
        ];
        if let Some(unknown) = obj.keys().find(|k| !FIELDS.contains(&k.as_str())) {
            return Err(RecordError::new(unknown.clone(), "unknown field"));
        }
        let id = required_string(obj, "id")?;
        let question = required_string(obj, "question")?;
        let answer = parse_label_field(obj.get("answer"), "answer")?;
        let choices = decode_choices(obj.get("choices"))?;
        let rephrase = optional_string(obj, "rephrase")?;
        let explanations = decode_explanations(obj.get("explanations"))?;
        let subdomain = optional_string(obj, "subdomain")?;
        let source = decode_source(obj.get("source"))?;
        Ok(McqPair {
            id,
            question,
            choices,
            answer,
            rephrase,
            explanations,
            subdomain,
            source,
        })
    }
}

fn label_map_value<'a>(entries: impl Iterator<Item = (Label, &'a str)>) -> Value {
    let mut map = Map::new();
    for (label, text) in entries {
        map.insert(label.to_string(), Value::String(text.to_string()));
    }
    Value::Object(map)
}

fn opt_string(v: &Option<String>) -> Value {
    v.as_ref().map_or(Value::Null, |s| Value::String(s.clone()))
}

fn required_string(obj: &Map<String, Value>, key: &str) -> Result<String, RecordError> {
    match obj.get(key) {
        None => Err(RecordError::new(key, "missing field")),
        Some(Value::String(s)) => Ok(s.clone()),
        Some(_) => Err(RecordError::new(key, "expected a string")),
    }
}

fn optional_string(obj: &Map<String, Value>, key: &str) -> Result<Option<String>, RecordError> {
    match obj.get(key) {
        None | Some(Value::Null) => Ok(None),
        Some(Value::String(s)) => Ok(Some(s.clone())),
        Some(_) => Err(RecordError::new(key, "expected a string or null")),
    }
}

pub(crate) fn parse_label_field(value: Option<&Value>, path: &str) -> Result<Label, RecordError> {
    match value {
        None => Err(RecordError::new(path, "missing field")),
        Some(Value::String(s)) => s
            .parse()
            .map_err(|e: UnknownLabel| RecordError::new(path, e.to_string())),
        Some(_) => Err(RecordError::new(path, "expected a string")),
    }
}

fn decode_label_object(
    value: &Value,
    path: &str,
) -> Result<BTreeMap<Label, String>, RecordError> {
    let obj = value
        .as_object()
        .ok_or_else(|| RecordError::new(path, "expected an object keyed by A, B, C, D"))?;
    let mut out = BTreeMap::new();
    for (key, v) in obj {
        let label: Label = key
            .parse()
            .map_err(|e: UnknownLabel| RecordError::new(format!("{path}.{key}"), e.to_string()))?;
        let text = v
            .as_str()
            .ok_or_else(|| RecordError::new(format!("{path}.{key}"), "expected a string"))?;
        out.insert(label, text.to_string());
    }
    Ok(out)
}

pub(crate) fn decode_choices(value: Option<&Value>) -> Result<Choices, RecordError> {
    let value = value.ok_or_else(|| RecordError::new("choices", "missing field"))?;
    let mut map = decode_label_object(value, "choices")?;
    let mut texts: [String; 4] = Default::default();
    for label in Label::ALL {
        texts[label.index()] = map
            .remove(&label)
            .ok_or_else(|| RecordError::new(format!("choices.{label}"), "missing choice"))?;
    }
    Ok(Choices(texts))
}

pub(crate) fn decode_explanations(
    value: Option<&Value>,
) -> Result<Option<BTreeMap<Label, String>>, RecordError> {
    match value {
        None | Some(Value::Null) => Ok(None),
        Some(v) => decode_label_object(v, "explanations").map(Some),
    }
}

fn decode_source(value: Option<&Value>) -> Result<Option<Source>, RecordError> {
    let obj = match value {
        None | Some(Value::Null) => return Ok(None),
        Some(Value::Object(obj)) => obj,
        Some(_) => return Err(RecordError::new("source", "expected an object or null")),
    };
    if let Some(unknown) = obj
        .keys()
        .find(|k| !["batch_id", "book_id", "section_path"].contains(&k.as_str()))
    {
        return Err(RecordError::new(format!("source.{unknown}"), "unknown field"));
    }
    let field = |key: &str| -> Result<String, RecordError> {
        match obj.get(key) {
            Some(Value::String(s)) => Ok(s.clone()),
            Some(_) => Err(RecordError::new(format!("source.{key}"), "expected a string")),
            None => Err(RecordError::new(format!("source.{key}"), "missing field")),
        }
    };
    let section_path = match obj.get("section_path") {
        Some(Value::Array(items)) => items
            .iter()
            .enumerate()
            .map(|(i, v)| {
                v.as_str().map(str::to_string).ok_or_else(|| {
                    RecordError::new(format!("source.section_path[{i}]"), "expected a string")
                })
            })
            .collect::<Result<Vec<_>, _>>()?,
        Some(_) => {
            return Err(RecordError::new("source.section_path", "expected an array of strings"))
        }
        None => return Err(RecordError::new("source.section_path", "missing field")),
    };
    Ok(Some(Source {
        book_id: field("book_id")?,
        section_path,
        batch_id: field("batch_id")?,
    }))
}

/// Evaluation tier of a problem set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tier {
    Easy,
    Hard,
    Comprehensive,
}

impl FromStr for Tier {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "easy" => Ok(Tier::Easy),
            "hard" => Ok(Tier::Hard),
            "comprehensive" => Ok(Tier::Comprehensive),
            other => Err(Error::Config(format!(
                "unknown tier {other:?}, expected easy, hard or comprehensive"
            ))),
        }
    }
}

/// How a problem set was assembled.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Provenance {
    pub parents: Vec<String>,
    pub seed: Option<u64>,
    pub sample_sizes: BTreeMap<String, usize>,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProblemSet {
    pub name: String,
    pub tier: Tier,
    pub pairs: Vec<McqPair>,
    pub created_from: Provenance,
}

impl ProblemSet {
    /// Build a set, rejecting duplicate pair ids.
    pub fn new(
        name: impl Into<String>,
        tier: Tier,
        pairs: Vec<McqPair>,
        created_from: Provenance,
    ) -> Result<Self, Error> {
        let mut seen = std::collections::HashSet::new();
        let dups: Vec<&str> = pairs
            .iter()
            .filter(|p| !seen.insert(p.id.as_str()))
            .map(|p| p.id.as_str())
            .collect();
        if !dups.is_empty() {
            let shown: Vec<&str> = dups.iter().take(5).copied().collect();
            return Err(Error::Validation(format!(
                "{} duplicate pair ids in set, e.g. {}",
                dups.len(),
                shown.join(", ")
            )));
        }
        Ok(ProblemSet {
            name: name.into(),
            tier,
            pairs,
            created_from,
        })
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

/// Per-stage counts for a built dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub raw: usize,
    pub validated: usize,
    pub test: usize,
    pub train_pre_augment: usize,
    pub train_augmented: usize,
    pub split_seed: u64,
    pub split_fraction: f64,
    pub taxonomy: String,
    pub tool_version: String,
}

impl DatasetManifest {
    pub fn check(&self, augmented: bool) -> Result<(), Error> {
        if self.test + self.train_pre_augment != self.validated {
            return Err(Error::Validation(format!(
                "test ({}) + train ({}) != validated ({})",
                self.test, self.train_pre_augment, self.validated
            )));
        }
        if augmented && self.train_augmented != 4 * self.train_pre_augment {
            return Err(Error::Validation(format!(
                "augmented train ({}) != 4 x train ({})",
                self.train_augmented, self.train_pre_augment
            )));
        }
        Ok(())
    }
}
