//! Offline provider that answers generation prompts with grammar-conformant
//! blocks derived from the passage.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;
use sha2::{Digest, Sha256};

use super::prompt::{extract_passage, requested_count, BLOCK_CLOSE, BLOCK_OPEN};
use crate::error::ProviderError;
use crate::model::{normalize_text, Label};
use crate::provider::{ChatProvider, ChatRequest};

/// Deterministic provider: the response depends only on the seed and the
/// prompt text.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MockProvider {
    seed: u64,
}

pub fn mock_provider(seed: u64) -> MockProvider {
    MockProvider { seed }
}

impl MockProvider {
    pub fn new(seed: u64) -> Self {
        MockProvider { seed }
    }

    pub fn respond(&self, prompt: &str) -> String {
        let mut hasher = Sha256::new();
        hasher.update(self.seed.to_le_bytes());
        hasher.update(prompt.as_bytes());
        let digest: [u8; 32] = hasher.finalize().into();
        let mut rng = ChaCha8Rng::from_seed(digest);

        let passage = extract_passage(prompt).unwrap_or("");
        let count = requested_count(prompt).unwrap_or(3);
        let keywords = keywords(passage);
        let facts = sentences(passage);

        let mut lines = Vec::with_capacity(count);
        for i in 0..count {
            let tag: u32 = rng.random();
            let kw_a = keywords
                .get((2 * i) % keywords.len().max(1))
                .cloned()
                .unwrap_or_else(|| "packet switching".into());
            let kw_b = keywords
                .get((2 * i + 1) % keywords.len().max(1))
                .cloned()
                .unwrap_or_else(|| "protocol layering".into());
            let fact = facts
                .get(i % facts.len().max(1))
                .cloned()
                .unwrap_or_else(|| format!("{kw_a} is described in this section."));

            let question = format!(
                "Which statement about {kw_a} and {kw_b} is supported by the source material (item {tag:08x})?"
            );
            let correct = fact;
            let mut distractors = [
                format!("{kw_a} is unrelated to {kw_b} in every network design."),
                format!("Only the physical transmission medium determines how {kw_a} behaves."),
                format!("{kw_b} is handled exclusively by end users and never by protocols."),
            ];
            let correct_norm = normalize_text(&correct);
            for (k, d) in distractors.iter_mut().enumerate() {
                if normalize_text(d) == correct_norm {
                    d.push_str(&format!(" (distractor {})", k + 1));
                }
            }

            let answer = Label::ALL[rng.random_range(0..4)];
            let mut choices: [String; 4] = Default::default();
            let mut explanations: [String; 4] = Default::default();
            let mut rest = distractors.iter();
            for label in Label::ALL {
                if label == answer {
                    choices[label.index()] = correct.clone();
                    explanations[label.index()] =
                        format!("Correct: the material states that {}", lower_first(&correct));
                } else {
                    let d = rest.next().expect("three distractors");
                    choices[label.index()] = d.clone();
                    explanations[label.index()] = format!(
                        "Incorrect: unlike the correct option, this claims that {}, which the material does not support.",
                        lower_first(d.trim_end_matches('.'))
                    );
                }
            }

            let record = json!({
                "question": question,
                "choices": {"A": choices[0], "B": choices[1], "C": choices[2], "D": choices[3]},
                "answer": answer.as_str(),
                "rephrase": format!("In other words: what does the material establish about {kw_a} in relation to {kw_b}?"),
                "explanations": {"A": explanations[0], "B": explanations[1], "C": explanations[2], "D": explanations[3]},
            });
            lines.push(record.to_string());
        }
        format!("{BLOCK_OPEN}\n{}\n{BLOCK_CLOSE}\n", lines.join("\n"))
    }
}

impl ChatProvider for MockProvider {
    fn complete(&self, request: &ChatRequest) -> Result<String, ProviderError> {
        Ok(self.respond(request.prompt()))
    }
}

fn lower_first(s: &str) -> String {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) => c.to_lowercase().collect::<String>() + chars.as_str(),
        None => String::new(),
    }
}

/// Distinct lowercase words of four or more letters, in order of appearance.
fn keywords(passage: &str) -> Vec<String> {
    let mut seen = std::collections::HashSet::new();
    passage
        .split(|c: char| !c.is_alphanumeric())
        .filter(|w| w.chars().count() >= 4 && w.chars().all(char::is_alphabetic))
        .map(str::to_lowercase)
        .filter(|w| seen.insert(w.clone()))
        .collect()
}

fn sentences(passage: &str) -> Vec<String> {
    passage
        .split_inclusive(['.', '!', '?'])
        .map(|s| s.split_whitespace().collect::<Vec<_>>().join(" "))
        .filter(|s| s.chars().count() >= 12)
        .map(|s| {
            if s.chars().count() > 200 {
                let cut: String = s.chars().take(197).collect();
                format!("{}...", cut.trim_end())
            } else {
                s
            }
        })
        .collect()
}
