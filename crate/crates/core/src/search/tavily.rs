//! Live client for a Tavily-compatible JSON search API.

use std::sync::Arc;
use std::time::Duration;

use async_trait::async_trait;
use reqwest::StatusCode;
use serde::{Deserialize, Serialize};
use tokio::sync::Semaphore;

use super::{SearchBackend, SearchError, SearchResult};
use crate::retry::{is_retryable_status, RetryPolicy};

pub const DEFAULT_SEARCH_ENDPOINT: &str = "https://api.tavily.com/search";

#[derive(Debug, Clone)]
pub struct TavilySettings {
    pub endpoint: String,
    pub api_key: String,
    pub timeout: Duration,
    pub retry: RetryPolicy,
    /// Concurrent requests allowed in flight.
    pub max_concurrent: usize,
}

impl TavilySettings {
    pub fn new(api_key: impl Into<String>) -> Self {
        Self {
            endpoint: DEFAULT_SEARCH_ENDPOINT.to_owned(),
            api_key: api_key.into(),
            timeout: Duration::from_secs(30),
            retry: RetryPolicy::default(),
            max_concurrent: 4,
        }
    }
}

#[derive(Serialize)]
struct SearchRequest<'a> {
    query: &'a str,
    max_results: usize,
    search_depth: &'static str,
    include_raw_content: bool,
    include_favicon: bool,
}

#[derive(Deserialize)]
struct SearchResponse {
    #[serde(default)]
    results: Vec<SearchResult>,
}

pub struct TavilySearch {
    http: reqwest::Client,
    settings: TavilySettings,
    permits: Arc<Semaphore>,
}

impl TavilySearch {
    pub fn new(settings: TavilySettings) -> Result<Self, SearchError> {
        let http = reqwest::Client::builder()
            .timeout(settings.timeout)
            .build()
            .map_err(|e| SearchError::Transport(e.to_string()))?;
        let permits = Arc::new(Semaphore::new(settings.max_concurrent.max(1)));
        Ok(Self {
            http,
            settings,
            permits,
        })
    }

    async fn attempt(&self, query: &str, top_k: usize) -> Result<Vec<SearchResult>, Attempt> {
        let body = SearchRequest {
            query,
            max_results: top_k,
            search_depth: "basic",
            include_raw_content: false,
            include_favicon: true,
        };
        tracing::debug!(
            endpoint = %self.settings.endpoint,
            authorization = "Bearer <redacted>",
            body = %serde_json::to_string(&body).unwrap_or_default(),
            "search request"
        );
        let response = self
            .http
            .post(&self.settings.endpoint)
            .bearer_auth(&self.settings.api_key)
            .json(&body)
            .send()
            .await
            .map_err(|e| Attempt::Retry(SearchError::Transport(e.to_string())))?;

        let status = response.status();
        let text = response
            .text()
            .await
            .map_err(|e| Attempt::Retry(SearchError::Transport(e.to_string())))?;
        tracing::debug!(status = status.as_u16(), body = %text, "search response");

        if status == StatusCode::UNAUTHORIZED || status == StatusCode::FORBIDDEN {
            return Err(Attempt::Stop(SearchError::Unauthorized(status.as_u16())));
        }
        if !status.is_success() {
            let err = SearchError::Status {
                status: status.as_u16(),
                body: text,
            };
            return Err(if is_retryable_status(status.as_u16()) {
                Attempt::Retry(err)
            } else {
                Attempt::Stop(err)
            });
        }
        let parsed: SearchResponse =
            serde_json::from_str(&text).map_err(|e| Attempt::Stop(SearchError::Decode(e.to_string())))?;
        let (valid, invalid): (Vec<_>, Vec<_>) = parsed.results.into_iter().partition(SearchResult::is_valid);
        if !invalid.is_empty() {
            tracing::warn!(dropped = invalid.len(), "search results with empty url or score outside [0, 1]");
        }
        Ok(valid)
    }
}

enum Attempt {
    Retry(SearchError),
    Stop(SearchError),
}

#[async_trait]
impl SearchBackend for TavilySearch {
    async fn search(&self, query: &str, top_k: usize) -> Result<Vec<SearchResult>, SearchError> {
        if query.trim().is_empty() {
            return Err(SearchError::EmptyQuery);
        }
        let _permit = self.permits.acquire().await.expect("semaphore never closed");
        let retry = self.settings.retry;
        let mut attempt = 0;
        loop {
            match self.attempt(query, top_k).await {
                Ok(mut results) => {
                    results.truncate(top_k);
                    return Ok(results);
                }
                Err(Attempt::Stop(err)) => return Err(err),
                Err(Attempt::Retry(err)) if attempt >= retry.max_retries => {
                    return Err(match err {
                        SearchError::Status { status: 429, .. } => SearchError::RateLimited {
                            attempts: attempt + 1,
                        },
                        other => other,
                    });
                }
                Err(Attempt::Retry(err)) => {
                    let delay = retry.delay_for(attempt);
                    tracing::warn!(%err, retry = attempt + 1, ?delay, "search attempt failed, backing off");
                    tokio::time::sleep(delay).await;
                    attempt += 1;
                }
            }
        }
    }
}
