use std::collections::{BTreeMap, HashMap, HashSet};
use std::sync::LazyLock;

use serde::{Deserialize, Serialize};

use super::bias::{position_bias, BiasReport};
use super::taxonomy::{TaxonomyMatcher, UNCATEGORIZED};
use crate::model::McqPair;

pub const DEFAULT_TOP_K: usize = 50;

static STOP_WORDS: LazyLock<HashSet<&'static str>> = LazyLock::new(|| {
    [
        "a", "about", "above", "after", "again", "against", "all", "also", "am", "an", "and",
        "any", "are", "as", "at", "be", "because", "been", "before", "being", "below", "between",
        "both", "but", "by", "can", "could", "did", "do", "does", "doing", "down", "during",
        "each", "few", "following", "for", "from", "further", "had", "has", "have", "having",
        "he", "her", "here", "hers", "him", "his", "how", "i", "if", "in", "into", "is", "it",
        "its", "itself", "just", "may", "me", "might", "more", "most", "must", "my", "no", "nor",
        "not", "now", "of", "off", "on", "once", "one", "only", "or", "other", "our", "out",
        "over", "own", "same", "shall", "she", "should", "so", "some", "such", "than", "that",
        "the", "their", "them", "then", "there", "these", "they", "this", "those", "through",
        "to", "too", "true", "false", "under", "until", "up", "use", "used", "uses", "using",
        "very", "was", "we", "were", "what", "when", "where", "which", "while", "who", "whom",
        "why", "will", "with", "would", "you", "your", "statement", "statements", "correct",
        "following", "best", "describes", "primary", "main", "typically",
    ]
    .into_iter()
    .collect()
});

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryCount {
    pub name: String,
    pub count: usize,
    pub fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermCount {
    pub term: String,
    pub count: usize,
}

/// Sub-domain distribution, question term frequencies, and answer-position
/// bias for a dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsReport {
    pub taxonomy: String,
    pub total: usize,
    /// Taxonomy categories in order, then `uncategorized`.
    pub categories: Vec<CategoryCount>,
    pub top_terms: Vec<TermCount>,
    pub bias: Option<BiasReport>,
}

fn terms(text: &str) -> impl Iterator<Item = String> + '_ {
    text.split(|c: char| !(c.is_alphanumeric() || c == '-'))
        .map(|w| w.trim_matches('-').to_lowercase())
        .filter(|w| {
            w.chars().count() >= 2
                && w.chars().any(char::is_alphabetic)
                && !STOP_WORDS.contains(w.as_str())
        })
}

pub fn stats(pairs: &[McqPair], taxonomy_name: &str, matcher: &TaxonomyMatcher, top_k: usize) -> StatsReport {
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for p in pairs {
        *counts.entry(matcher.classify(p)).or_default() += 1;
    }
    let total = pairs.len();
    let fraction = |c: usize| if total == 0 { 0.0 } else { c as f64 / total as f64 };
    let categories = matcher
        .names()
        .chain(std::iter::once(UNCATEGORIZED))
        .map(|name| {
            let count = counts.get(name).copied().unwrap_or(0);
            CategoryCount {
                name: name.to_string(),
                count,
                fraction: fraction(count),
            }
        })
        .collect();

    let mut freq: HashMap<String, usize> = HashMap::new();
    for p in pairs {
        for t in terms(&p.question) {
            *freq.entry(t).or_default() += 1;
        }
    }
    let mut top_terms: Vec<TermCount> = freq
        .into_iter()
        .map(|(term, count)| TermCount { term, count })
        .collect();
    top_terms.sort_by(|a, b| b.count.cmp(&a.count).then_with(|| a.term.cmp(&b.term)));
    top_terms.truncate(top_k);

    StatsReport {
        taxonomy: taxonomy_name.to_string(),
        total,
        categories,
        top_terms,
        bias: position_bias(pairs).ok(),
    }
}
