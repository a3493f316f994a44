//! Retrieval-augmented multiple-choice dataset construction: corpus
//! ingestion, question generation, curation, evaluation, and review.

pub mod curation;
pub mod error;
pub mod eval;
pub mod generation;
pub mod ingest;
pub mod jsonl;
pub mod model;
pub mod provider;
pub mod review;

pub use error::{Error, ProviderError, RecordError, Result};
pub use ingest::{CorpusSegment, RawDocument};
pub use model::{Choices, DatasetManifest, Issue, Label, McqPair, ProblemSet, Provenance, Source, Tier};
