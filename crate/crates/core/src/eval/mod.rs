//! Problem-set composition and multiple-choice evaluation of answering
//! models, with accuracy broken down by answer position and sub-domain.

mod answerer;
mod extract;

use std::collections::{BTreeMap, HashSet};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use answerer::{Answerer, ConstantAnswerer, OracleAnswerer, ProviderAnswerer, RandomAnswerer};
pub use extract::extract_answer;

use crate::curation::{format_question_block, position_bias, BiasReport, UNCATEGORIZED};
use crate::error::{Error, Result};
use crate::model::{Label, McqPair, ProblemSet, Provenance, Tier};

/// Merge a seeded down-sample of `easy` (size `min(|easy|, |hard|)`) with
/// all of `hard`. Sampled easy pairs keep their original relative order and
/// come first.
pub fn compose_comprehensive(easy: &ProblemSet, hard: &ProblemSet, seed: u64) -> Result<ProblemSet> {
    if easy.is_empty() || hard.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let hard_ids: HashSet<&str> = hard.pairs.iter().map(|p| p.id.as_str()).collect();
    let dups: Vec<&str> = easy
        .pairs
        .iter()
        .map(|p| p.id.as_str())
        .filter(|id| hard_ids.contains(id))
        .collect();
    if !dups.is_empty() {
        return Err(Error::Validation(format!(
            "{} pair ids present in both {} and {}, e.g. {}",
            dups.len(),
            easy.name,
            hard.name,
            dups[..dups.len().min(5)].join(", ")
        )));
    }

    let k = easy.len().min(hard.len());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked: Vec<usize> = rand::seq::index::sample(&mut rng, easy.len(), k).into_vec();
    picked.sort_unstable();

    let mut pairs: Vec<McqPair> = picked.iter().map(|&i| easy.pairs[i].clone()).collect();
    pairs.extend(hard.pairs.iter().cloned());

    let mut sample_sizes = BTreeMap::new();
    sample_sizes.insert(easy.name.clone(), k);
    sample_sizes.insert(hard.name.clone(), hard.len());
    ProblemSet::new(
        "comprehensive",
        Tier::Comprehensive,
        pairs,
        Provenance {
            parents: vec![easy.name.clone(), hard.name.clone()],
            seed: Some(seed),
            sample_sizes,
            note: None,
        },
    )
}

/// Question, options A to D on one line each, and the answer instruction.
/// Rephrase and explanations are never included.
pub fn format_eval_prompt(pair: &McqPair) -> String {
    format_question_block(pair)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalConfig {
    pub model: String,
    pub seed: u64,
    pub temperature: f64,
    pub parallelism: usize,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            model: "oracle".into(),
            seed: 42,
            temperature: 0.0,
            parallelism: 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalItemRecord {
    pub pair_id: String,
    pub prompt: String,
    pub raw_output: String,
    pub extracted: Option<Label>,
    pub correct: bool,
    pub latency_ms: u64,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tally {
    pub total: usize,
    pub correct: usize,
    pub accuracy: f64,
}

impl Tally {
    fn new(total: usize, correct: usize) -> Self {
        Tally {
            total,
            correct,
            accuracy: if total == 0 { 0.0 } else { correct as f64 / total as f64 },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub answerer: String,
    pub model: String,
    pub seed: u64,
    pub temperature: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub set: String,
    pub total: usize,
    pub answered: usize,
    pub unparsed: usize,
    pub accuracy: f64,
    /// Keyed by the correct label's position.
    pub per_position: BTreeMap<Label, Tally>,
    pub per_subdomain: BTreeMap<String, Tally>,
    pub bias: BiasReport,
    pub config: ConfigEcho,
}

impl EvalReport {
    pub fn correct(&self) -> usize {
        self.per_position.values().map(|t| t.correct).sum()
    }
}

#[derive(Debug, Clone)]
pub struct EvalOutput {
    pub report: EvalReport,
    pub items: Vec<EvalItemRecord>,
}

fn evaluate_one(pair: &McqPair, answerer: &dyn Answerer) -> EvalItemRecord {
    let prompt = format_eval_prompt(pair);
    let start = Instant::now();
    let result = answerer.answer(pair, &prompt);
    let latency_ms = start.elapsed().as_millis() as u64;
    let (raw_output, error) = match result {
        Ok(text) => (text, None),
        Err(e) => (String::new(), Some(e.to_string())),
    };
    let extracted = extract_answer(&raw_output);
    EvalItemRecord {
        pair_id: pair.id.clone(),
        prompt,
        correct: extracted == Some(pair.answer),
        raw_output,
        extracted,
        latency_ms,
        error,
    }
}

/// Ask `answerer` every question in `set` and aggregate the results.
/// Unparsed or failed answers count as incorrect.
pub fn run_eval(set: &ProblemSet, answerer: &dyn Answerer, cfg: &EvalConfig) -> Result<EvalOutput> {
    if set.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if cfg.parallelism == 0 {
        return Err(Error::Config("parallelism must be at least 1".into()));
    }
    let pairs = &set.pairs;
    let slots: Mutex<Vec<Option<EvalItemRecord>>> = Mutex::new(vec![None; pairs.len()]);
    let next = AtomicUsize::new(0);
    std::thread::scope(|scope| {
        for _ in 0..cfg.parallelism.min(pairs.len()) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= pairs.len() {
                    break;
                }
                let record = evaluate_one(&pairs[i], answerer);
                slots.lock().expect("slot lock")[i] = Some(record);
            });
        }
    });
    let items: Vec<EvalItemRecord> = slots
        .into_inner()
        .expect("slot lock")
        .into_iter()
        .map(|r| r.expect("every item evaluated"))
        .collect();

    let report = aggregate(set, &items, answerer.name(), cfg)?;
    Ok(EvalOutput { report, items })
}

/// Build the report from per-item records (matched to pairs by position).
pub fn aggregate(
    set: &ProblemSet,
    items: &[EvalItemRecord],
    answerer: String,
    cfg: &EvalConfig,
) -> Result<EvalReport> {
    let mut pos_counts: BTreeMap<Label, (usize, usize)> =
        Label::ALL.iter().map(|l| (*l, (0, 0))).collect();
    let mut sub_counts: BTreeMap<String, (usize, usize)> = BTreeMap::new();
    let mut unparsed = 0;
    let mut correct = 0;
    for (pair, item) in set.pairs.iter().zip(items) {
        debug_assert_eq!(pair.id, item.pair_id);
        if item.extracted.is_none() {
            unparsed += 1;
        }
        let hit = usize::from(item.correct);
        correct += hit;
        let e = pos_counts.get_mut(&pair.answer).expect("all labels present");
        e.0 += 1;
        e.1 += hit;
        let s = sub_counts
            .entry(pair.subdomain.clone().unwrap_or_else(|| UNCATEGORIZED.to_string()))
            .or_default();
        s.0 += 1;
        s.1 += hit;
    }
    let total = set.len();
    Ok(EvalReport {
        set: set.name.clone(),
        total,
        answered: total - unparsed,
        unparsed,
        accuracy: correct as f64 / total as f64,
        per_position: pos_counts
            .into_iter()
            .map(|(l, (t, c))| (l, Tally::new(t, c)))
            .collect(),
        per_subdomain: sub_counts
            .into_iter()
            .map(|(s, (t, c))| (s, Tally::new(t, c)))
            .collect(),
        bias: position_bias(&set.pairs)?,
        config: ConfigEcho {
            answerer,
            model: cfg.model.clone(),
            seed: cfg.seed,
            temperature: cfg.temperature,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curation::fixtures::{layer_pair, synthetic};

    fn set(name: &str, pairs: Vec<McqPair>, tier: Tier) -> ProblemSet {
        ProblemSet::new(name, tier, pairs, Provenance::default()).unwrap()
    }

    fn offset(n: usize, start: usize) -> Vec<McqPair> {
        let mut v = synthetic(n + start, |i| Label::ALL[i % 4]);
        v.drain(..start);
        v
    }

    #[test]
    fn compose_easy_larger() {
        let easy = set("easy", offset(756, 0), Tier::Easy);
        let hard = set("hard", offset(327, 1000), Tier::Hard);
        let c = compose_comprehensive(&easy, &hard, 7).unwrap();
        assert_eq!(c.len(), 654);
        assert_eq!(c.tier, Tier::Comprehensive);
        assert_eq!(c.created_from.parents, vec!["easy", "hard"]);
        assert_eq!(c.created_from.seed, Some(7));
        assert_eq!(c.created_from.sample_sizes["easy"], 327);
        let easy_ids: HashSet<_> = easy.pairs.iter().map(|p| &p.id).collect();
        assert_eq!(c.pairs.iter().filter(|p| easy_ids.contains(&p.id)).count(), 327);
        assert_eq!(c, compose_comprehensive(&easy, &hard, 7).unwrap());
        assert_ne!(c.pairs, compose_comprehensive(&easy, &hard, 8).unwrap().pairs);
    }

    #[test]
    fn compose_easy_smaller_takes_everything() {
        let easy = set("easy", offset(100, 0), Tier::Easy);
        let hard = set("hard", offset(327, 1000), Tier::Hard);
        let c = compose_comprehensive(&easy, &hard, 1).unwrap();
        assert_eq!(c.len(), 427);
        assert_eq!(&c.pairs[..100], &easy.pairs[..]);
    }

    #[test]
    fn compose_rejects_shared_ids() {
        let easy = set("easy", offset(10, 0), Tier::Easy);
        let hard = set("hard", offset(10, 5), Tier::Hard);
        let err = compose_comprehensive(&easy, &hard, 1).unwrap_err().to_string();
        assert!(err.contains(&hard.pairs[0].id), "{err}");
    }

    #[test]
    fn eval_prompt_format() {
        let mut p = layer_pair();
        p.choices[Label::C] = "Data link\nlayer".into();
        p.refresh_id();
        let prompt = format_eval_prompt(&p);
        let option_lines: Vec<&str> = prompt
            .lines()
            .filter(|l| ["A.", "B.", "C.", "D."].iter().any(|s| l.starts_with(s)))
            .collect();
        assert_eq!(option_lines.len(), 4);
        assert!(prompt.contains("C. Data link layer\n"));
        assert!(prompt.contains("Answer with the letter of the correct option."));
        for e in p.explanations.as_ref().unwrap().values() {
            assert!(!prompt.contains(e.as_str()));
        }
        assert!(!prompt.contains(p.rephrase.as_deref().unwrap()));
    }

    #[test]
    fn oracle_and_constant() {
        let s = set("bal", synthetic(40, |i| Label::ALL[i % 4]), Tier::Easy);
        let cfg = EvalConfig::default();
        let out = run_eval(&s, &OracleAnswerer, &cfg).unwrap();
        assert_eq!(out.report.accuracy, 1.0);
        assert_eq!(out.report.unparsed, 0);
        let out = run_eval(&s, &ConstantAnswerer(Label::A), &cfg).unwrap();
        assert_eq!(out.report.accuracy, 0.25);
        assert_eq!(out.report.per_position[&Label::A].accuracy, 1.0);
        assert_eq!(out.report.per_position[&Label::B].accuracy, 0.0);
    }

    #[test]
    fn parallelism_does_not_change_results() {
        let s = set("x", synthetic(97, |i| Label::ALL[(i * 7) % 4]), Tier::Hard);
        let a = run_eval(&s, &RandomAnswerer::new(3), &EvalConfig { parallelism: 1, ..EvalConfig::default() }).unwrap();
        let b = run_eval(&s, &RandomAnswerer::new(3), &EvalConfig { parallelism: 8, ..EvalConfig::default() }).unwrap();
        assert_eq!(a.report, b.report);
        let strip = |v: &[EvalItemRecord]| v.iter().map(|r| (r.pair_id.clone(), r.extracted)).collect::<Vec<_>>();
        assert_eq!(strip(&a.items), strip(&b.items));
    }

    #[test]
    fn report_keys() {
        let s = set("keys", synthetic(4, |i| Label::ALL[i]), Tier::Easy);
        let out = run_eval(&s, &OracleAnswerer, &EvalConfig::default()).unwrap();
        let v = serde_json::to_value(&out.report).unwrap();
        let keys: Vec<&String> = v.as_object().unwrap().keys().collect();
        assert_eq!(
            keys,
            vec!["accuracy", "answered", "bias", "config", "per_position", "per_subdomain", "set", "total", "unparsed"]
        );
        assert_eq!(v["per_subdomain"]["uncategorized"]["total"], 4);
    }

    #[test]
    fn empty_set_is_an_error() {
        let s = set("empty", vec![], Tier::Easy);
        assert!(matches!(run_eval(&s, &OracleAnswerer, &EvalConfig::default()), Err(Error::EmptyDataset)));
    }
}
