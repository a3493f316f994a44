//! Human review of sampled pairs.
//!
//! State lives in one directory:
//!
//! ```text
//! <dir>/sessions/<id>.json         session metadata and sampled ids
//! <dir>/sessions/<id>.pairs.jsonl  sampled pair records, in session order
//! <dir>/verdicts.jsonl             append-only verdict log (all sessions)
//! ```
//!
//! Re-submitting a verdict for the same pair appends a new line; replaying
//! the log keeps the last one.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs::{self, File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::{Mutex, RwLock};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::jsonl;
use crate::model::McqPair;

pub const DEFAULT_SAMPLE_SIZE: usize = 200;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReviewSession {
    pub session_id: String,
    pub dataset: String,
    pub seed: u64,
    pub requested_size: usize,
    pub pair_ids: Vec<String>,
    pub created_at: String,
}

impl ReviewSession {
    pub fn sample_size(&self) -> usize {
        self.pair_ids.len()
    }
}

/// Verdict fields as submitted by a reviewer.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerdictInput {
    pub pair_id: String,
    pub question_ok: bool,
    pub answer_ok: bool,
    pub explanation_ok: bool,
    pub accept: bool,
    #[serde(default)]
    pub notes: String,
}

impl VerdictInput {
    pub fn check(&self) -> Result<()> {
        if self.accept && !(self.question_ok && self.answer_ok && self.explanation_ok) {
            let mut bad = Vec::new();
            if !self.question_ok {
                bad.push("question_ok");
            }
            if !self.answer_ok {
                bad.push("answer_ok");
            }
            if !self.explanation_ok {
                bad.push("explanation_ok");
            }
            return Err(Error::Validation(format!(
                "accept requires all component flags to be true; false: {}",
                bad.join(", ")
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReviewVerdict {
    pub session_id: String,
    pub pair_id: String,
    pub question_ok: bool,
    pub answer_ok: bool,
    pub explanation_ok: bool,
    pub accept: bool,
    pub notes: String,
    pub timestamp: String,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RejectionReasons {
    pub question: usize,
    pub answer: usize,
    pub explanation: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionSummary {
    pub session_id: String,
    pub sample_size: usize,
    pub reviewed: usize,
    pub remaining: usize,
    pub accepted: usize,
    pub rejected: usize,
    /// accepted / reviewed; absent until something has been reviewed.
    pub acceptance_rate: Option<f64>,
    /// Among rejected pairs, how many flagged each component as not OK.
    pub rejection_reasons: RejectionReasons,
}

/// Summarize the latest verdict per sampled pair.
pub fn summarize<'a>(
    session: &ReviewSession,
    latest: impl IntoIterator<Item = &'a ReviewVerdict>,
) -> SessionSummary {
    let mut reviewed = 0;
    let mut accepted = 0;
    let mut reasons = RejectionReasons::default();
    for v in latest {
        reviewed += 1;
        if v.accept {
            accepted += 1;
        } else {
            reasons.question += usize::from(!v.question_ok);
            reasons.answer += usize::from(!v.answer_ok);
            reasons.explanation += usize::from(!v.explanation_ok);
        }
    }
    SessionSummary {
        session_id: session.session_id.clone(),
        sample_size: session.sample_size(),
        reviewed,
        remaining: session.sample_size() - reviewed,
        accepted,
        rejected: reviewed - accepted,
        acceptance_rate: (reviewed > 0).then(|| accepted as f64 / reviewed as f64),
        rejection_reasons: reasons,
    }
}

/// Seeded sample without replacement of distinct pair ids. Ids are sorted
/// before shuffling so the sample does not depend on input order.
pub fn sample_ids(pairs: &[McqPair], sample_size: usize, seed: u64) -> Vec<String> {
    let mut ids: Vec<String> = pairs
        .iter()
        .map(|p| p.id.clone())
        .collect::<HashSet<_>>()
        .into_iter()
        .collect();
    ids.sort();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    ids.shuffle(&mut rng);
    ids.truncate(sample_size);
    ids
}

fn session_id(dataset: &str, sample_size: usize, seed: u64, ids: &[String]) -> String {
    let mut h = Sha256::new();
    h.update(dataset.as_bytes());
    h.update([0]);
    h.update(sample_size.to_le_bytes());
    h.update(seed.to_le_bytes());
    for id in ids {
        h.update(id.as_bytes());
    }
    hex::encode(&h.finalize()[..8])
}

pub enum Next {
    Pair(Box<McqPair>),
    Done,
}

struct SessionState {
    session: ReviewSession,
    pairs: HashMap<String, McqPair>,
    verdicts: HashMap<String, ReviewVerdict>,
}

impl SessionState {
    fn summary(&self) -> SessionSummary {
        // latest verdicts, in session order
        let latest = self
            .session
            .pair_ids
            .iter()
            .filter_map(|id| self.verdicts.get(id));
        summarize(&self.session, latest)
    }
}

/// Directory-backed review state shared by concurrent request handlers.
pub struct ReviewStore {
    dir: PathBuf,
    state: RwLock<HashMap<String, SessionState>>,
    log: Mutex<File>,
}

impl ReviewStore {
    /// Open (or create) a store, replaying sessions and the verdict log.
    pub fn open(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        let sessions_dir = dir.join("sessions");
        fs::create_dir_all(&sessions_dir)?;

        let mut state = HashMap::new();
        let mut entries: Vec<PathBuf> = fs::read_dir(&sessions_dir)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "json"))
            .collect();
        entries.sort();
        for path in entries {
            let session: ReviewSession = jsonl::read_json(&path)?;
            let pairs = jsonl::read_pairs(&Self::pairs_path_in(&dir, &session.session_id))?;
            let pairs = pairs.into_iter().map(|p| (p.id.clone(), p)).collect();
            state.insert(
                session.session_id.clone(),
                SessionState {
                    session,
                    pairs,
                    verdicts: HashMap::new(),
                },
            );
        }

        let log_path = dir.join("verdicts.jsonl");
        if log_path.exists() {
            for v in jsonl::read_jsonl::<ReviewVerdict>(&log_path)? {
                if let Some(s) = state.get_mut(&v.session_id) {
                    if s.pairs.contains_key(&v.pair_id) {
                        s.verdicts.insert(v.pair_id.clone(), v);
                    }
                }
            }
        }
        let log = OpenOptions::new().create(true).append(true).open(&log_path)?;
        Ok(ReviewStore {
            dir,
            state: RwLock::new(state),
            log: Mutex::new(log),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn pairs_path_in(dir: &Path, id: &str) -> PathBuf {
        dir.join("sessions").join(format!("{id}.pairs.jsonl"))
    }

    /// Sample pairs for review. Creating the same sample twice returns the
    /// existing session.
    pub fn create_session(
        &self,
        dataset: &str,
        pairs: &[McqPair],
        sample_size: usize,
        seed: u64,
    ) -> Result<ReviewSession> {
        if pairs.is_empty() {
            return Err(Error::EmptyDataset);
        }
        if sample_size == 0 {
            return Err(Error::Config("sample size must be at least 1".into()));
        }
        let ids = sample_ids(pairs, sample_size, seed);
        let id = session_id(dataset, sample_size, seed, &ids);

        let mut state = self.state.write().expect("review state lock");
        if let Some(existing) = state.get(&id) {
            return Ok(existing.session.clone());
        }
        let by_id: HashMap<&str, &McqPair> = pairs.iter().map(|p| (p.id.as_str(), p)).collect();
        let sampled: Vec<McqPair> = ids.iter().map(|i| by_id[i.as_str()].clone()).collect();
        let session = ReviewSession {
            session_id: id.clone(),
            dataset: dataset.to_string(),
            seed,
            requested_size: sample_size,
            pair_ids: ids,
            created_at: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true),
        };
        jsonl::write_pairs(&Self::pairs_path_in(&self.dir, &id), &sampled)?;
        jsonl::write_json(&self.dir.join("sessions").join(format!("{id}.json")), &session)?;
        state.insert(
            id,
            SessionState {
                session: session.clone(),
                pairs: sampled.into_iter().map(|p| (p.id.clone(), p)).collect(),
                verdicts: HashMap::new(),
            },
        );
        Ok(session)
    }

    fn with_session<T>(&self, id: &str, f: impl FnOnce(&SessionState) -> T) -> Result<T> {
        let state = self.state.read().expect("review state lock");
        state
            .get(id)
            .map(f)
            .ok_or_else(|| Error::NotFound(format!("session {id}")))
    }

    pub fn session(&self, id: &str) -> Result<ReviewSession> {
        self.with_session(id, |s| s.session.clone())
    }

    pub fn sampled_pairs(&self, id: &str) -> Result<Vec<McqPair>> {
        self.with_session(id, |s| {
            s.session.pair_ids.iter().map(|i| s.pairs[i].clone()).collect()
        })
    }

    pub fn session_ids(&self) -> Vec<String> {
        let mut ids: Vec<String> = self.state.read().expect("review state lock").keys().cloned().collect();
        ids.sort();
        ids
    }

    /// First sampled pair, in session order, without a verdict.
    pub fn next_unreviewed(&self, id: &str) -> Result<Next> {
        self.with_session(id, |s| {
            s.session
                .pair_ids
                .iter()
                .find(|pid| !s.verdicts.contains_key(*pid))
                .map_or(Next::Done, |pid| Next::Pair(Box::new(s.pairs[pid].clone())))
        })
    }

    pub fn record_verdict(&self, session_id: &str, input: VerdictInput) -> Result<ReviewVerdict> {
        self.with_session(session_id, |s| {
            if s.pairs.contains_key(&input.pair_id) {
                Ok(())
            } else {
                Err(Error::Validation(format!(
                    "pair {} is not in session {session_id}",
                    input.pair_id
                )))
            }
        })??;
        input.check()?;

        let verdict = ReviewVerdict {
            session_id: session_id.to_string(),
            pair_id: input.pair_id,
            question_ok: input.question_ok,
            answer_ok: input.answer_ok,
            explanation_ok: input.explanation_ok,
            accept: input.accept,
            notes: input.notes,
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true),
        };
        let mut line = serde_json::to_string(&verdict)?;
        line.push('\n');

        // the log lock orders appends and the matching state updates
        let mut log = self.log.lock().expect("verdict log lock");
        log.write_all(line.as_bytes())?;
        log.flush()?;
        let mut state = self.state.write().expect("review state lock");
        if let Some(s) = state.get_mut(session_id) {
            s.verdicts.insert(verdict.pair_id.clone(), verdict.clone());
        }
        Ok(verdict)
    }

    pub fn summary(&self, id: &str) -> Result<SessionSummary> {
        self.with_session(id, SessionState::summary)
    }

    /// Latest verdicts for a session, keyed by pair id.
    pub fn verdicts(&self, id: &str) -> Result<BTreeMap<String, ReviewVerdict>> {
        self.with_session(id, |s| {
            s.verdicts.iter().map(|(k, v)| (k.clone(), v.clone())).collect()
        })
    }
}
