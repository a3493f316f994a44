//! RaC pair generation: one chat-completion request per corpus segment,
//! with parse-failure retries that feed the parse error back to the model.

mod mock;
mod parse;
mod prompt;

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use mock::{mock_provider, MockProvider};
pub use parse::{parse_generation, GenerationParseError};
pub use prompt::{
    build_prompt, escape_fences, extract_passage, requested_count, retry_prompt, BLOCK_CLOSE,
    BLOCK_OPEN, PASSAGE_CLOSE, PASSAGE_OPEN,
};

use crate::error::{Error, Result};
use crate::ingest::CorpusSegment;
use crate::model::{McqPair, Source};
use crate::provider::{complete_with_retry, Backoff, ChatProvider, ChatRequest};

#[derive(Debug, Clone, PartialEq)]
pub struct GenerationConfig {
    pub temperature: f64,
    pub top_p: f64,
    pub frequency_penalty: f64,
    pub presence_penalty: f64,
    pub model: String,
    pub questions_per_segment: usize,
    pub max_retries: u32,
    pub parallelism: usize,
    pub backoff: Backoff,
}

impl Default for GenerationConfig {
    fn default() -> Self {
        GenerationConfig {
            temperature: 1.0,
            top_p: 1.0,
            frequency_penalty: 0.0,
            presence_penalty: 0.0,
            model: "gpt-4".into(),
            questions_per_segment: 3,
            max_retries: 3,
            parallelism: 4,
            backoff: Backoff::default(),
        }
    }
}

impl GenerationConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if !(0.0..=2.0).contains(&self.temperature) {
            return bad(format!("temperature {} outside [0, 2]", self.temperature));
        }
        if !(self.top_p > 0.0 && self.top_p <= 1.0) {
            return bad(format!("top_p {} outside (0, 1]", self.top_p));
        }
        for (name, v) in [
            ("frequency_penalty", self.frequency_penalty),
            ("presence_penalty", self.presence_penalty),
        ] {
            if !(-2.0..=2.0).contains(&v) {
                return bad(format!("{name} {v} outside [-2, 2]"));
            }
        }
        if self.parallelism == 0 {
            return bad("parallelism must be at least 1".into());
        }
        if self.questions_per_segment == 0 {
            return bad("questions_per_segment must be at least 1".into());
        }
        if self.model.trim().is_empty() {
            return bad("model name is empty".into());
        }
        Ok(())
    }

    pub fn request(&self, prompt: String) -> ChatRequest {
        let mut req = ChatRequest::user(&self.model, prompt);
        req.temperature = self.temperature;
        req.top_p = self.top_p;
        req.frequency_penalty = self.frequency_penalty;
        req.presence_penalty = self.presence_penalty;
        req
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum BatchOutcome {
    Ok { pair_ids: Vec<String> },
    Failed { kind: FailureKind, error: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FailureKind {
    Provider,
    Parse,
}

/// Audit record for one segment's request(s).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenerationBatchRecord {
    pub batch_id: String,
    pub segment_index: usize,
    pub book_id: String,
    pub section_path: Vec<String>,
    pub attempts: u32,
    pub raw_response: Option<String>,
    pub outcome: BatchOutcome,
    pub started_at: String,
    pub finished_at: String,
}

impl GenerationBatchRecord {
    pub fn is_ok(&self) -> bool {
        matches!(self.outcome, BatchOutcome::Ok { .. })
    }
}

#[derive(Debug, Clone, Default)]
pub struct GenerationOutput {
    pub pairs: Vec<McqPair>,
    pub records: Vec<GenerationBatchRecord>,
}

impl GenerationOutput {
    pub fn failed(&self) -> usize {
        self.records.iter().filter(|r| !r.is_ok()).count()
    }

    /// True when there was work to do and none of it succeeded.
    pub fn all_failed(&self) -> bool {
        !self.records.is_empty() && self.failed() == self.records.len()
    }
}

/// Stable batch id derived from the segment's position and content.
pub fn batch_id(index: usize, segment: &CorpusSegment) -> String {
    let mut h = Sha256::new();
    h.update(index.to_le_bytes());
    h.update(segment.book_id.as_bytes());
    h.update([0]);
    for part in &segment.section_path {
        h.update(part.as_bytes());
        h.update([0]);
    }
    h.update(segment.text.as_bytes());
    hex::encode(&h.finalize()[..8])
}

fn now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}

fn generate_one(
    index: usize,
    segment: &CorpusSegment,
    cfg: &GenerationConfig,
    provider: &dyn ChatProvider,
) -> (Vec<McqPair>, GenerationBatchRecord) {
    let started_at = now();
    let batch_id = batch_id(index, segment);
    let base = build_prompt(segment, cfg);
    let mut prompt = base.clone();
    let mut attempts = 0;
    let mut parse_tries = 0;
    let mut raw_response = None;

    let (pairs, outcome) = loop {
        let request = cfg.request(prompt.clone());
        let (result, n) = complete_with_retry(provider, &request, cfg.max_retries, &cfg.backoff);
        attempts += n;
        let text = match result {
            Ok(text) => text,
            Err(e) => {
                break (
                    Vec::new(),
                    BatchOutcome::Failed {
                        kind: FailureKind::Provider,
                        error: e.to_string(),
                    },
                )
            }
        };
        let parsed = parse_generation(&text, cfg.questions_per_segment);
        raw_response = Some(text);
        match parsed {
            Ok(pairs) => {
                let source = Source {
                    book_id: segment.book_id.clone(),
                    section_path: segment.section_path.clone(),
                    batch_id: batch_id.clone(),
                };
                let pairs: Vec<McqPair> =
                    pairs.into_iter().map(|p| p.with_source(source.clone())).collect();
                let pair_ids = pairs.iter().map(|p| p.id.clone()).collect();
                break (pairs, BatchOutcome::Ok { pair_ids });
            }
            Err(e) if parse_tries < cfg.max_retries => {
                parse_tries += 1;
                prompt = retry_prompt(&base, &e.to_string());
            }
            Err(e) => {
                break (
                    Vec::new(),
                    BatchOutcome::Failed {
                        kind: FailureKind::Parse,
                        error: e.to_string(),
                    },
                )
            }
        }
    };

    let record = GenerationBatchRecord {
        batch_id,
        segment_index: index,
        book_id: segment.book_id.clone(),
        section_path: segment.section_path.clone(),
        attempts,
        raw_response,
        outcome,
        started_at,
        finished_at: now(),
    };
    (pairs, record)
}

/// Generate RaC pairs for every segment with at most `cfg.parallelism`
/// requests in flight. Output order follows segment order regardless of
/// completion order; failed segments are recorded and skipped.
type BatchResult = (Vec<McqPair>, GenerationBatchRecord);

pub fn generate_pairs(
    segments: &[CorpusSegment],
    cfg: &GenerationConfig,
    provider: &dyn ChatProvider,
) -> Result<GenerationOutput> {
    cfg.validate()?;
    if let Some(i) = segments.iter().position(|s| s.text.trim().is_empty()) {
        return Err(Error::Config(format!("segment {i} has empty text")));
    }

    let slots: Mutex<Vec<Option<BatchResult>>> = Mutex::new(vec![None; segments.len()]);
    let next = AtomicUsize::new(0);
    let workers = cfg.parallelism.min(segments.len());

    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= segments.len() {
                    break;
                }
                let result = generate_one(i, &segments[i], cfg, provider);
                slots.lock().expect("result lock")[i] = Some(result);
            });
        }
    });

    let mut out = GenerationOutput::default();
    for slot in slots.into_inner().expect("result lock") {
        let (pairs, record) = slot.expect("every segment processed");
        out.pairs.extend(pairs);
        out.records.push(record);
    }
    Ok(out)
}
