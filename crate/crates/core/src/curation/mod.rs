//! Dataset curation: validation, deduplication, ChoiceBoost augmentation,
//! answer-position bias, seeded splits, SFT export and distribution stats.

mod augment;
mod bias;
mod sft;
mod split;
mod stats;
mod taxonomy;

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

pub use augment::{choiceboost, choiceboost_all};
pub use bias::{position_bias, BiasReport};
pub use sft::{export_sft, format_question_block, sft_answer, SftMeta, SftRecord, SftStyle, ANSWER_INSTRUCTION};
pub use split::{split, test_size};
pub use stats::{stats, CategoryCount, StatsReport, TermCount, DEFAULT_TOP_K};
pub use taxonomy::{Category, Taxonomy, TaxonomyMatcher, UNCATEGORIZED};

use crate::jsonl::BadLine;
use crate::model::{normalize_text, Issue, McqPair};

pub const MIN_QUESTION_CHARS: usize = 10;

/// A line that could not be decoded into a pair at all.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MalformedLine {
    pub line: usize,
    pub path: String,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    /// Records read, including malformed lines.
    pub total: usize,
    pub valid: usize,
    pub invalid: usize,
    pub issues: Vec<Issue>,
    pub malformed: Vec<MalformedLine>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.invalid == 0
    }
}

/// Validate decoded pairs plus the lines that failed decoding.
pub fn validate_file_contents(
    pairs: Vec<McqPair>,
    bad_lines: Vec<BadLine>,
) -> (Vec<McqPair>, ValidationReport) {
    let decoded = pairs.len();
    let (valid, issues) = validate(pairs);
    let invalid_decoded = decoded - valid.len();
    let report = ValidationReport {
        total: decoded + bad_lines.len(),
        valid: valid.len(),
        invalid: invalid_decoded + bad_lines.len(),
        malformed: bad_lines
            .into_iter()
            .map(|b| MalformedLine {
                line: b.line,
                path: b.error.path,
                message: b.error.message,
            })
            .collect(),
        issues,
    };
    (valid, report)
}

/// Issues for one pair: core invariants plus dataset-level checks.
pub fn pair_issues(pair: &McqPair) -> Vec<Issue> {
    let mut issues = pair.issues();
    if pair.question.trim().chars().count() < MIN_QUESTION_CHARS {
        issues.push(Issue::new(
            &pair.id,
            "question",
            format!("shorter than {MIN_QUESTION_CHARS} characters"),
        ));
    }
    let q = normalize_text(&pair.question);
    for (label, text) in pair.choices.iter() {
        if normalize_text(text) == q {
            issues.push(Issue::new(&pair.id, format!("choices.{label}"), "equals the question"));
        }
    }
    issues
}

/// Split pairs into those passing every check and the issues found.
/// Valid pairs pass through unchanged and in order.
pub fn validate(pairs: Vec<McqPair>) -> (Vec<McqPair>, Vec<Issue>) {
    let mut valid = Vec::with_capacity(pairs.len());
    let mut issues = Vec::new();
    for pair in pairs {
        let found = pair_issues(&pair);
        if found.is_empty() {
            valid.push(pair);
        } else {
            issues.extend(found);
        }
    }
    (valid, issues)
}

/// Drop pairs whose normalized question repeats an earlier one.
pub fn dedupe(pairs: Vec<McqPair>) -> Vec<McqPair> {
    let mut seen = HashSet::new();
    pairs
        .into_iter()
        .filter(|p| seen.insert(normalize_text(&p.question)))
        .collect()
}

/// Drop pairs whose id repeats an earlier one.
pub fn dedupe_by_id(pairs: Vec<McqPair>) -> Vec<McqPair> {
    let mut seen = HashSet::new();
    pairs.into_iter().filter(|p| seen.insert(p.id.clone())).collect()
}
