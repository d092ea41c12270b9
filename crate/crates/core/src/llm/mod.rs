//! The four LLM interactions the agents rely on, and their backends.
//!
//! [`ScriptedLlm`] answers from lookup tables and is what the tests and the
//! offline CLI mode use. [`ChatLlm`] talks to an OpenAI-compatible
//! chat-completion endpoint and parses fenced JSON answers.

mod chat;
pub mod prompts;
mod scripted;

use std::sync::Arc;
use std::time::Duration;

use async_trait::async_trait;
use thiserror::Error;

use crate::search::SearchResult;

pub use chat::{ChatLlm, ChatMessage, ChatTransport, HttpChatTransport, Role};
pub use scripted::{past_set_digest, ScriptedBehavior, ScriptedLlm, UniquenessRule};

/// Paragraph a section carries when no search result survived filtering.
pub const NO_SOURCES_NOTE: &str =
    "_No relevant web sources were found for this topic; the following is not backed by search evidence._";

#[derive(Debug, Error)]
pub enum LlmError {
    #[error("LLM transport error: {0}")]
    Transport(String),
    #[error("LLM endpoint returned HTTP {status}: {body}")]
    Status { status: u16, body: String },
    #[error("LLM endpoint rejected the credentials (HTTP {0})")]
    Unauthorized(u16),
    #[error("LLM call timed out after {0:?}")]
    Timeout(Duration),
    #[error("malformed {expected} reply after {attempts} attempts: {reason}")]
    Malformed {
        expected: &'static str,
        attempts: u32,
        reason: String,
    },
}

impl LlmError {
    pub fn is_fatal(&self) -> bool {
        matches!(self, LlmError::Unauthorized(_))
    }

    pub(crate) fn is_retryable(&self) -> bool {
        match self {
            LlmError::Transport(_) | LlmError::Timeout(_) => true,
            LlmError::Status { status, .. } => crate::retry::is_retryable_status(*status),
            LlmError::Unauthorized(_) | LlmError::Malformed { .. } => false,
        }
    }
}

/// How a live backend issues requests.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LlmRequestPolicy {
    /// Extra attempts after the first, shared by transport failures and
    /// repair prompts for unparseable replies. A well-formed "no" never
    /// consumes one.
    pub max_retries: u32,
    pub timeout: Duration,
    pub model_id: String,
    /// Backoff base between transport retries.
    pub base_delay: Duration,
    pub max_concurrent: usize,
}

impl LlmRequestPolicy {
    pub fn new(model_id: impl Into<String>) -> Self {
        Self {
            max_retries: 2,
            timeout: Duration::from_secs(60),
            model_id: model_id.into(),
            base_delay: Duration::from_millis(500),
            max_concurrent: 4,
        }
    }
}

#[async_trait]
pub trait LlmBackend: Send + Sync {
    /// Whether `topic` splits into at least two independently researchable
    /// sub-topics.
    async fn can_split(&self, topic: &str) -> Result<bool, LlmError>;

    /// Up to `max_count` self-contained sub-queries, in the backend's order.
    async fn decompose(&self, topic: &str, max_count: usize) -> Result<Vec<String>, LlmError>;

    /// Whether `topic` is distinct from every entry of `past_topics`.
    async fn is_different(&self, topic: &str, past_topics: &[String]) -> Result<bool, LlmError>;

    /// A markdown section on `topic` grounded in `evidence`. With no evidence
    /// the section says so.
    async fn write_section(&self, topic: &str, evidence: &[SearchResult]) -> Result<String, LlmError>;
}

macro_rules! forward_llm {
    ($ptr:ident) => {
        #[async_trait]
        impl<T: LlmBackend + ?Sized> LlmBackend for $ptr<T> {
            async fn can_split(&self, topic: &str) -> Result<bool, LlmError> {
                (**self).can_split(topic).await
            }
            async fn decompose(&self, topic: &str, max_count: usize) -> Result<Vec<String>, LlmError> {
                (**self).decompose(topic, max_count).await
            }
            async fn is_different(&self, topic: &str, past_topics: &[String]) -> Result<bool, LlmError> {
                (**self).is_different(topic, past_topics).await
            }
            async fn write_section(&self, topic: &str, evidence: &[SearchResult]) -> Result<String, LlmError> {
                (**self).write_section(topic, evidence).await
            }
        }
    };
}

forward_llm!(Box);
forward_llm!(Arc);

/// Trims, drops blanks and caps an over-long decomposition.
pub(crate) fn cap_sub_queries(topic: &str, raw: Vec<String>, max_count: usize) -> Vec<String> {
    let mut queries: Vec<String> = raw
        .into_iter()
        .map(|q| q.trim().to_owned())
        .filter(|q| !q.is_empty())
        .collect();
    if queries.len() > max_count {
        tracing::warn!(
            topic,
            returned = queries.len(),
            max_count,
            "decomposition longer than allowed, truncating"
        );
        queries.truncate(max_count);
    }
    queries
}

/// Puts [`NO_SOURCES_NOTE`] in front of `body` unless it is already there.
pub(crate) fn with_no_sources_note(body: String) -> String {
    if body.contains(NO_SOURCES_NOTE) {
        body
    } else if body.trim().is_empty() {
        NO_SOURCES_NOTE.to_owned()
    } else {
        format!("{NO_SOURCES_NOTE}\n\n{body}")
    }
}
