use std::sync::LazyLock;

use regex::Regex;

use crate::model::Label;

// "Answer: B", "answer is (c)", "The correct answer is option D", "**Answer:** A"
static ANSWER_PHRASE: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(
        r"(?i)\banswer\b[\s*]*(?:is|would be|should be|[:=\-])[\s*:]*(?:option\s+|choice\s+)?[(\[]?\s*([a-d])\b([)\].,:;!]?)",
    )
    .unwrap()
});

static LABEL_LINE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?i)^\s*[*_]*[(\[]?\s*([a-d])\s*[)\]]?\s*[.:)]?[*_]*\s*$").unwrap());

static WRAPPED_TOKEN: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?i)^[*_]*(?:\(([a-d])\)|\[([a-d])\]|([a-d])[.):;,!?])[.,:;*_]*$").unwrap());

const LABEL_VERBS: [&str; 12] = [
    "is", "seems", "would", "should", "appears", "looks", "because", "since", "as", "-", "--", "\u{2014}",
];

fn label_of(c: &str) -> Option<Label> {
    c.to_ascii_uppercase().parse().ok()
}

/// Read the chosen label from free-form model output.
///
/// Rules, first match wins:
/// 1. an explicit phrase such as "Answer: X" or "the answer is X";
/// 2. a line holding only a label, optionally wrapped or punctuated
///    ("B", "B.", "(B)");
/// 3. the first standalone label token among the first 10 tokens.
///
/// A lowercase or article-like bare "a" is only accepted when punctuation
/// or context marks it as a label.
pub fn extract_answer(output: &str) -> Option<Label> {
    for caps in ANSWER_PHRASE.captures_iter(output) {
        let letter = &caps[1];
        let trailing = caps.get(2).map_or("", |m| m.as_str());
        let end = caps.get(0).unwrap().end();
        let at_end = output[end..].trim().is_empty();
        if letter.chars().all(|c| c.is_ascii_uppercase()) || !trailing.is_empty() || at_end {
            return label_of(letter);
        }
    }

    for line in output.lines() {
        if let Some(caps) = LABEL_LINE.captures(line) {
            return label_of(&caps[1]);
        }
    }

    let tokens: Vec<&str> = output.split_whitespace().take(10).collect();
    for (i, token) in tokens.iter().enumerate() {
        if let Some(caps) = WRAPPED_TOKEN.captures(token) {
            let letter = caps.get(1).or(caps.get(2)).or(caps.get(3)).unwrap().as_str();
            return label_of(letter);
        }
        let bare = token.trim_matches(|c: char| c == '*' || c == '_');
        if bare.len() == 1 && matches!(bare, "A" | "B" | "C" | "D") {
            if bare == "A" {
                // "A router ..." is an article, "A is correct" is a label
                let next = tokens.get(i + 1).map(|t| t.to_lowercase());
                let labelish = match next.as_deref() {
                    None => true,
                    Some(n) => LABEL_VERBS.contains(&n) || !n.starts_with(|c: char| c.is_alphabetic()),
                };
                if !labelish {
                    continue;
                }
            }
            return label_of(bare);
        }
    }
    None
}
