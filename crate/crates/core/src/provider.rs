//! Chat-completion providers speaking the OpenAI-compatible wire shape.

use std::time::Duration;

use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::ProviderError;

pub const API_KEY_ENV: &str = "RAC_API_KEY";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: String,
    pub content: String,
}

/// Request body for `POST {base_url}/chat/completions`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatRequest {
    pub model: String,
    pub messages: Vec<ChatMessage>,
    pub temperature: f64,
    pub top_p: f64,
    pub frequency_penalty: f64,
    pub presence_penalty: f64,
}

impl ChatRequest {
    /// Single user-message request.
    pub fn user(model: &str, prompt: impl Into<String>) -> Self {
        ChatRequest {
            model: model.to_string(),
            messages: vec![ChatMessage {
                role: "user".into(),
                content: prompt.into(),
            }],
            temperature: 1.0,
            top_p: 1.0,
            frequency_penalty: 0.0,
            presence_penalty: 0.0,
        }
    }

    pub fn prompt(&self) -> &str {
        self.messages.last().map_or("", |m| m.content.as_str())
    }
}

pub trait ChatProvider: Send + Sync {
    /// Return the assistant message text for one request.
    fn complete(&self, request: &ChatRequest) -> Result<String, ProviderError>;
}

impl<P: ChatProvider + ?Sized> ChatProvider for &P {
    fn complete(&self, request: &ChatRequest) -> Result<String, ProviderError> {
        (**self).complete(request)
    }
}

impl<P: ChatProvider + ?Sized> ChatProvider for Box<P> {
    fn complete(&self, request: &ChatRequest) -> Result<String, ProviderError> {
        (**self).complete(request)
    }
}

/// Blocking HTTP client for an OpenAI-compatible endpoint.
pub struct HttpProvider {
    base_url: String,
    api_key: Option<String>,
    agent: ureq::Agent,
}

impl HttpProvider {
    pub fn new(base_url: impl Into<String>, api_key: Option<String>) -> Self {
        let agent = ureq::Agent::config_builder()
            .http_status_as_error(false)
            .timeout_global(Some(Duration::from_secs(300)))
            .build()
            .new_agent();
        HttpProvider {
            base_url: base_url.into().trim_end_matches('/').to_string(),
            api_key,
            agent,
        }
    }

    /// Bearer token from `RAC_API_KEY`, if set.
    pub fn from_env(base_url: impl Into<String>) -> Self {
        Self::new(base_url, std::env::var(API_KEY_ENV).ok().filter(|k| !k.is_empty()))
    }

    pub fn endpoint(&self) -> String {
        format!("{}/chat/completions", self.base_url)
    }
}

impl ChatProvider for HttpProvider {
    fn complete(&self, request: &ChatRequest) -> Result<String, ProviderError> {
        let mut req = self.agent.post(&self.endpoint());
        if let Some(key) = &self.api_key {
            req = req.header("Authorization", &format!("Bearer {key}"));
        }
        let mut resp = req
            .send_json(request)
            .map_err(|e| ProviderError::Transport(e.to_string()))?;
        let status = resp.status().as_u16();
        let body = resp
            .body_mut()
            .read_to_string()
            .map_err(|e| ProviderError::Transport(e.to_string()))?;
        match status {
            200..=299 => {}
            401 | 403 => return Err(ProviderError::Auth { status }),
            _ => return Err(ProviderError::Status { status, body }),
        }
        let value: Value =
            serde_json::from_str(&body).map_err(|e| ProviderError::Malformed(e.to_string()))?;
        value
            .pointer("/choices/0/message/content")
            .and_then(Value::as_str)
            .map(str::to_string)
            .ok_or_else(|| ProviderError::Malformed("missing choices[0].message.content".into()))
    }
}

/// Exponential backoff with jitter for retryable transport failures.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Backoff {
    pub initial: Duration,
    pub factor: f64,
    pub max: Duration,
    pub jitter: bool,
}

impl Default for Backoff {
    fn default() -> Self {
        Backoff {
            initial: Duration::from_secs(1),
            factor: 2.0,
            max: Duration::from_secs(30),
            jitter: true,
        }
    }
}

impl Backoff {
    pub const fn none() -> Self {
        Backoff {
            initial: Duration::ZERO,
            factor: 1.0,
            max: Duration::ZERO,
            jitter: false,
        }
    }

    /// Delay before retry number `retry` (0-based), capped at `max`.
    pub fn delay(&self, retry: u32) -> Duration {
        let base = self.initial.as_secs_f64() * self.factor.powi(retry as i32);
        let capped = base.min(self.max.as_secs_f64());
        let secs = if self.jitter && capped > 0.0 {
            // uniform in [50%, 100%] of the capped delay
            capped * rand::rng().random_range(0.5..=1.0)
        } else {
            capped
        };
        Duration::from_secs_f64(secs)
    }
}

/// Call `provider`, retrying retryable errors up to `max_retries` times.
/// Returns the result and the number of attempts made.
pub fn complete_with_retry(
    provider: &dyn ChatProvider,
    request: &ChatRequest,
    max_retries: u32,
    backoff: &Backoff,
) -> (Result<String, ProviderError>, u32) {
    let mut attempt = 0;
    loop {
        attempt += 1;
        match provider.complete(request) {
            Ok(text) => return (Ok(text), attempt),
            Err(e) if e.is_retryable() && attempt <= max_retries => {
                std::thread::sleep(backoff.delay(attempt - 1));
            }
            Err(e) => return (Err(e), attempt),
        }
    }
}
