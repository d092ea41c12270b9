//! Live backend over an OpenAI-compatible chat-completion endpoint.

use std::sync::atomic::{AtomicU64, Ordering};
use std::time::Duration;

use async_trait::async_trait;
use reqwest::StatusCode;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use tokio::sync::Semaphore;

use super::prompts::{self, bullet_list, evidence_block};
use super::{cap_sub_queries, with_no_sources_note, LlmBackend, LlmError, LlmRequestPolicy, NO_SOURCES_NOTE};
use crate::retry::RetryPolicy;
use crate::search::SearchResult;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    System,
    User,
    Assistant,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: Role,
    pub content: String,
}

impl ChatMessage {
    pub fn new(role: Role, content: impl Into<String>) -> Self {
        Self {
            role,
            content: content.into(),
        }
    }
}

/// Sends one chat exchange and returns the assistant's text.
#[async_trait]
pub trait ChatTransport: Send + Sync {
    async fn complete(&self, model: &str, messages: &[ChatMessage]) -> Result<String, LlmError>;
}

pub struct HttpChatTransport {
    http: reqwest::Client,
    endpoint: String,
    api_key: String,
}

impl HttpChatTransport {
    pub fn new(endpoint: impl Into<String>, api_key: impl Into<String>, timeout: Duration) -> Result<Self, LlmError> {
        let http = reqwest::Client::builder()
            .timeout(timeout)
            .build()
            .map_err(|e| LlmError::Transport(e.to_string()))?;
        Ok(Self {
            http,
            endpoint: endpoint.into(),
            api_key: api_key.into(),
        })
    }
}

#[derive(Serialize)]
struct CompletionRequest<'a> {
    model: &'a str,
    messages: &'a [ChatMessage],
}

#[derive(Deserialize)]
struct CompletionResponse {
    choices: Vec<Choice>,
}

#[derive(Deserialize)]
struct Choice {
    message: ChoiceMessage,
}

#[derive(Deserialize)]
struct ChoiceMessage {
    #[serde(default)]
    content: Option<String>,
}

#[async_trait]
impl ChatTransport for HttpChatTransport {
    async fn complete(&self, model: &str, messages: &[ChatMessage]) -> Result<String, LlmError> {
        let request = CompletionRequest { model, messages };
        tracing::debug!(
            endpoint = %self.endpoint,
            authorization = "Bearer <redacted>",
            body = %serde_json::to_string(&request).unwrap_or_default(),
            "chat request"
        );
        let response = self
            .http
            .post(&self.endpoint)
            .bearer_auth(&self.api_key)
            .json(&request)
            .send()
            .await
            .map_err(|e| {
                if e.is_timeout() {
                    LlmError::Transport(format!("request timed out: {e}"))
                } else {
                    LlmError::Transport(e.to_string())
                }
            })?;
        let status = response.status();
        let text = response.text().await.map_err(|e| LlmError::Transport(e.to_string()))?;
        tracing::debug!(status = status.as_u16(), body = %text, "chat response");

        if status == StatusCode::UNAUTHORIZED || status == StatusCode::FORBIDDEN {
            return Err(LlmError::Unauthorized(status.as_u16()));
        }
        if !status.is_success() {
            return Err(LlmError::Status {
                status: status.as_u16(),
                body: text,
            });
        }
        let parsed: CompletionResponse =
            serde_json::from_str(&text).map_err(|e| LlmError::Transport(format!("undecodable completion: {e}")))?;
        Ok(parsed
            .choices
            .into_iter()
            .next()
            .and_then(|c| c.message.content)
            .unwrap_or_default())
    }
}

/// [`LlmBackend`] on top of a [`ChatTransport`].
///
/// Gate and decomposition calls ask for a fenced JSON block. An unparseable
/// reply gets one repair prompt per remaining retry; transport failures are
/// retried with backoff. Both draw from the same `max_retries` budget.
pub struct ChatLlm<T = HttpChatTransport> {
    transport: T,
    policy: LlmRequestPolicy,
    permits: Semaphore,
    retries: AtomicU64,
}

impl<T: ChatTransport> ChatLlm<T> {
    pub fn new(transport: T, policy: LlmRequestPolicy) -> Self {
        let permits = Semaphore::new(policy.max_concurrent.max(1));
        Self {
            transport,
            policy,
            permits,
            retries: AtomicU64::new(0),
        }
    }

    pub fn policy(&self) -> &LlmRequestPolicy {
        &self.policy
    }

    /// Retries spent so far, across all calls.
    pub fn retries_used(&self) -> u64 {
        self.retries.load(Ordering::Relaxed)
    }

    async fn ask<R>(
        &self,
        expected: &'static str,
        prompt: String,
        parse: impl Fn(&str) -> Result<R, String> + Send,
    ) -> Result<R, LlmError> {
        let _permit = self.permits.acquire().await.expect("semaphore never closed");
        let backoff = RetryPolicy::new(self.policy.max_retries, self.policy.base_delay);
        let mut messages = vec![
            ChatMessage::new(Role::System, prompts::render(prompts::SYSTEM, &[])),
            ChatMessage::new(Role::User, prompt),
        ];
        let mut retry = 0;
        loop {
            let outcome = match tokio::time::timeout(
                self.policy.timeout,
                self.transport.complete(&self.policy.model_id, &messages),
            )
            .await
            {
                Ok(result) => result,
                Err(_) => Err(LlmError::Timeout(self.policy.timeout)),
            };
            let exhausted = retry >= self.policy.max_retries;
            match outcome {
                Ok(reply) => match parse(&reply) {
                    Ok(value) => return Ok(value),
                    Err(reason) if exhausted => {
                        return Err(LlmError::Malformed {
                            expected,
                            attempts: retry + 1,
                            reason,
                        })
                    }
                    Err(reason) => {
                        tracing::warn!(expected, %reason, "unparseable reply, sending repair prompt");
                        messages.push(ChatMessage::new(Role::Assistant, reply));
                        messages.push(ChatMessage::new(
                            Role::User,
                            prompts::render(prompts::REPAIR, &[("error", &reason)]),
                        ));
                    }
                },
                Err(err) if exhausted || !err.is_retryable() => return Err(err),
                Err(err) => {
                    let delay = backoff.delay_for(retry);
                    tracing::warn!(%err, ?delay, "LLM call failed, retrying");
                    tokio::time::sleep(delay).await;
                }
            }
            retry += 1;
            self.retries.fetch_add(1, Ordering::Relaxed);
        }
    }
}

#[async_trait]
impl<T: ChatTransport> LlmBackend for ChatLlm<T> {
    async fn can_split(&self, topic: &str) -> Result<bool, LlmError> {
        let prompt = prompts::render(prompts::SPLIT_GATE, &[("topic", topic)]);
        self.ask("split answer", prompt, parse_bool_answer).await
    }

    async fn decompose(&self, topic: &str, max_count: usize) -> Result<Vec<String>, LlmError> {
        let prompt = prompts::render(
            prompts::DECOMPOSE,
            &[("topic", topic), ("max_count", &max_count.to_string())],
        );
        let raw = self.ask("sub-query list", prompt, parse_sub_queries).await?;
        Ok(cap_sub_queries(topic, raw, max_count))
    }

    async fn is_different(&self, topic: &str, past_topics: &[String]) -> Result<bool, LlmError> {
        if past_topics.is_empty() {
            return Ok(true);
        }
        let prompt = prompts::render(
            prompts::UNIQUENESS_GATE,
            &[("topic", topic), ("past_topics", &bullet_list(past_topics))],
        );
        self.ask("uniqueness answer", prompt, parse_bool_answer).await
    }

    async fn write_section(&self, topic: &str, evidence: &[SearchResult]) -> Result<String, LlmError> {
        let prompt = prompts::render(
            prompts::WRITE_SECTION,
            &[
                ("topic", topic),
                ("evidence", &evidence_block(evidence)),
                ("no_sources_note", NO_SOURCES_NOTE),
            ],
        );
        let body = self
            .ask("markdown section", prompt, |reply| {
                let trimmed = reply.trim();
                if trimmed.is_empty() {
                    Err("empty reply".to_owned())
                } else {
                    Ok(trimmed.to_owned())
                }
            })
            .await?;
        Ok(if evidence.is_empty() {
            with_no_sources_note(body)
        } else {
            body
        })
    }
}

/// The JSON payload of a reply: the first fenced block if there is one,
/// otherwise the whole reply.
fn json_payload(reply: &str) -> &str {
    let Some(start) = reply.find("```") else {
        return reply.trim();
    };
    let after = &reply[start + 3..];
    // Skip the info string (e.g. `json`) up to the end of the fence line.
    let body = match after.find('\n') {
        Some(nl) => &after[nl + 1..],
        None => after,
    };
    match body.find("```") {
        Some(end) => body[..end].trim(),
        None => body.trim(),
    }
}

fn parse_json(reply: &str) -> Result<Value, String> {
    serde_json::from_str(json_payload(reply)).map_err(|e| format!("not valid JSON ({e})"))
}

pub(crate) fn parse_bool_answer(reply: &str) -> Result<bool, String> {
    match parse_json(reply)? {
        Value::Bool(b) => Ok(b),
        Value::Object(map) => map
            .get("answer")
            .and_then(Value::as_bool)
            .ok_or_else(|| "expected a boolean \"answer\" field".to_owned()),
        _ => Err("expected {\"answer\": true|false}".to_owned()),
    }
}

pub(crate) fn parse_sub_queries(reply: &str) -> Result<Vec<String>, String> {
    let value = parse_json(reply)?;
    let list = match &value {
        Value::Array(items) => items,
        Value::Object(map) => map
            .get("sub_queries")
            .and_then(Value::as_array)
            .ok_or_else(|| "expected a \"sub_queries\" array".to_owned())?,
        _ => return Err("expected {\"sub_queries\": [...]}".to_owned()),
    };
    list.iter()
        .map(|item| {
            item.as_str()
                .map(str::to_owned)
                .ok_or_else(|| "sub_queries must all be strings".to_owned())
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::VecDeque;
    use std::sync::Mutex;

    /// Replays canned replies and records every exchange it was sent.
    struct Canned {
        replies: Mutex<VecDeque<Result<String, LlmError>>>,
        seen: Mutex<Vec<Vec<ChatMessage>>>,
    }

    impl Canned {
        fn new(replies: Vec<Result<&str, LlmError>>) -> Self {
            Self {
                replies: Mutex::new(replies.into_iter().map(|r| r.map(str::to_owned)).collect()),
                seen: Mutex::new(Vec::new()),
            }
        }
        fn calls(&self) -> usize {
            self.seen.lock().unwrap().len()
        }
    }

    #[async_trait]
    impl ChatTransport for Canned {
        async fn complete(&self, _model: &str, messages: &[ChatMessage]) -> Result<String, LlmError> {
            self.seen.lock().unwrap().push(messages.to_vec());
            self.replies
                .lock()
                .unwrap()
                .pop_front()
                .unwrap_or_else(|| Err(LlmError::Transport("no more canned replies".into())))
        }
    }

    fn llm(replies: Vec<Result<&str, LlmError>>) -> ChatLlm<Canned> {
        let mut policy = LlmRequestPolicy::new("test-model");
        policy.base_delay = Duration::ZERO;
        ChatLlm::new(Canned::new(replies), policy)
    }

    #[test]
    fn payload_extraction() {
        assert_eq!(json_payload("```json\n{\"answer\": true}\n```"), "{\"answer\": true}");
        assert_eq!(json_payload("Sure!\n```\n[1]\n```\nbye"), "[1]");
        assert_eq!(json_payload("  false "), "false");
        assert_eq!(parse_bool_answer("```json\n{\"answer\": false}\n```"), Ok(false));
        assert_eq!(parse_bool_answer("true"), Ok(true));
        assert!(parse_bool_answer("yes").is_err());
        assert!(parse_bool_answer("{\"answer\": \"yes\"}").is_err());
        assert_eq!(
            parse_sub_queries("```json\n{\"sub_queries\": [\"a\", \"b\"]}\n```").unwrap(),
            ["a", "b"]
        );
        assert_eq!(parse_sub_queries("[\"x\"]").unwrap(), ["x"]);
        assert!(parse_sub_queries("{\"sub_queries\": [1]}").is_err());
    }

    #[tokio::test]
    async fn well_formed_false_costs_no_retries() {
        let llm = llm(vec![Ok("```json\n{\"answer\": false}\n```")]);
        assert!(!llm.can_split("topic").await.unwrap());
        assert_eq!(llm.retries_used(), 0);
        assert_eq!(llm.transport.calls(), 1);
    }

    #[tokio::test]
    async fn malformed_reply_gets_repair_prompt() {
        let llm = llm(vec![Ok("I think so"), Ok("```json\n{\"answer\": true}\n```")]);
        assert!(llm.can_split("topic").await.unwrap());
        assert_eq!(llm.retries_used(), 1);
        let seen = llm.transport.seen.lock().unwrap();
        let repair = seen[1].last().unwrap();
        assert_eq!(repair.role, Role::User);
        assert!(repair.content.contains("could not be used"));
        assert_eq!(seen[1][seen[1].len() - 2].content, "I think so");
    }

    #[tokio::test]
    async fn retry_exhaustion_is_an_error() {
        let llm = llm(vec![Ok("nope"), Ok("still nope"), Ok("no json here")]);
        match llm.can_split("topic").await {
            Err(LlmError::Malformed { attempts, .. }) => assert_eq!(attempts, 3),
            other => panic!("unexpected {other:?}"),
        }
        assert_eq!(llm.retries_used(), 2);

        let mut policy = LlmRequestPolicy::new("m");
        policy.max_retries = 1;
        let strict = ChatLlm::new(Canned::new(vec![Ok("x"), Ok("y"), Ok("true")]), policy);
        assert!(matches!(strict.can_split("t").await, Err(LlmError::Malformed { .. })));
        assert_eq!(strict.transport.calls(), 2);
    }

    #[tokio::test]
    async fn transport_errors_retry_then_surface() {
        let llm = llm(vec![Err(LlmError::Transport("reset".into())), Ok("[\"a\", \"b\", \"c\"]")]);
        assert_eq!(llm.decompose("t", 2).await.unwrap(), ["a", "b"]);
        assert_eq!(llm.retries_used(), 1);

        let fatal = self::llm(vec![Err(LlmError::Unauthorized(401)), Ok("true")]);
        assert!(matches!(fatal.can_split("t").await, Err(LlmError::Unauthorized(401))));
        assert_eq!(fatal.transport.calls(), 1);
    }

    #[tokio::test]
    async fn empty_past_topics_skip_the_call() {
        let llm = llm(vec![]);
        assert!(llm.is_different("t", &[]).await.unwrap());
        assert_eq!(llm.transport.calls(), 0);
    }

    #[tokio::test]
    async fn section_with_no_evidence_states_absence() {
        let llm = llm(vec![Ok("Some general background.")]);
        let body = llm.write_section("t", &[]).await.unwrap();
        assert!(body.starts_with(NO_SOURCES_NOTE));
        let prompt = &llm.transport.seen.lock().unwrap()[0][1].content;
        assert!(prompt.contains("(no search results)"));
    }

    #[tokio::test]
    async fn slow_transport_times_out() {
        struct Slow;
        #[async_trait]
        impl ChatTransport for Slow {
            async fn complete(&self, _: &str, _: &[ChatMessage]) -> Result<String, LlmError> {
                tokio::time::sleep(Duration::from_secs(5)).await;
                Ok("true".into())
            }
        }
        let mut policy = LlmRequestPolicy::new("m");
        policy.timeout = Duration::from_millis(10);
        policy.max_retries = 1;
        policy.base_delay = Duration::ZERO;
        let llm = ChatLlm::new(Slow, policy);
        assert!(matches!(llm.can_split("t").await, Err(LlmError::Timeout(_))));
        assert_eq!(llm.retries_used(), 1);
    }
}
