use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use crate::error::ProviderError;
use crate::model::{Label, McqPair};
use crate::provider::{complete_with_retry, Backoff, ChatProvider, ChatRequest};

/// Something that answers an evaluation prompt with free-form text.
pub trait Answerer: Send + Sync {
    fn name(&self) -> String;
    fn answer(&self, pair: &McqPair, prompt: &str) -> Result<String, ProviderError>;
}

/// Always answers correctly by reading the pair's label.
#[derive(Debug, Clone, Copy, Default)]
pub struct OracleAnswerer;

impl Answerer for OracleAnswerer {
    fn name(&self) -> String {
        "oracle".into()
    }

    fn answer(&self, pair: &McqPair, _prompt: &str) -> Result<String, ProviderError> {
        Ok(format!("Answer: {}", pair.answer))
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ConstantAnswerer(pub Label);

impl Answerer for ConstantAnswerer {
    fn name(&self) -> String {
        format!("constant-{}", self.0)
    }

    fn answer(&self, _pair: &McqPair, _prompt: &str) -> Result<String, ProviderError> {
        Ok(format!("Answer: {}", self.0))
    }
}

/// Uniform random label per question; the draw depends only on the seed and
/// the pair id, so results do not depend on order or parallelism.
#[derive(Debug, Clone, Copy)]
pub struct RandomAnswerer {
    seed: u64,
}

impl RandomAnswerer {
    pub fn new(seed: u64) -> Self {
        RandomAnswerer { seed }
    }

    pub fn pick(&self, pair_id: &str) -> Label {
        let mut h = Sha256::new();
        h.update(self.seed.to_le_bytes());
        h.update(pair_id.as_bytes());
        let digest: [u8; 32] = h.finalize().into();
        Label::ALL[ChaCha8Rng::from_seed(digest).random_range(0..4)]
    }
}

impl Answerer for RandomAnswerer {
    fn name(&self) -> String {
        format!("random-{}", self.seed)
    }

    fn answer(&self, pair: &McqPair, _prompt: &str) -> Result<String, ProviderError> {
        Ok(format!("Answer: {}", self.pick(&pair.id)))
    }
}

/// Answers through a chat-completion provider.
pub struct ProviderAnswerer<P> {
    pub provider: P,
    pub model: String,
    pub temperature: f64,
    pub max_retries: u32,
    pub backoff: Backoff,
}

impl<P: ChatProvider> ProviderAnswerer<P> {
    pub fn new(provider: P, model: impl Into<String>) -> Self {
        ProviderAnswerer {
            provider,
            model: model.into(),
            temperature: 0.0,
            max_retries: 3,
            backoff: Backoff::default(),
        }
    }
}

impl<P: ChatProvider> Answerer for ProviderAnswerer<P> {
    fn name(&self) -> String {
        format!("provider:{}", self.model)
    }

    fn answer(&self, _pair: &McqPair, prompt: &str) -> Result<String, ProviderError> {
        let mut req = ChatRequest::user(&self.model, prompt);
        req.temperature = self.temperature;
        complete_with_retry(&self.provider, &req, self.max_retries, &self.backoff).0
    }
}
