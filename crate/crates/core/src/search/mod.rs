//! Web search: result schema, backends and relevance filtering.

mod fixture;
mod tavily;

use std::path::PathBuf;

use async_trait::async_trait;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use fixture::{fixture_file_name, FixtureSearch};
pub use tavily::{TavilySearch, TavilySettings, DEFAULT_SEARCH_ENDPOINT};

/// One search hit, field-for-field as the search API returns it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub title: String,
    pub url: String,
    /// Summary snippet.
    pub content: String,
    /// Relevance in `[0, 1]`.
    pub score: f64,
    #[serde(default)]
    pub raw_content: Option<String>,
    #[serde(default)]
    pub favicon: Option<String>,
}

impl SearchResult {
    pub fn is_valid(&self) -> bool {
        !self.url.is_empty() && (0.0..=1.0).contains(&self.score)
    }
}

#[derive(Debug, Error)]
pub enum SearchError {
    #[error("search query is empty")]
    EmptyQuery,
    #[error("search transport error: {0}")]
    Transport(String),
    #[error("search API returned HTTP {status}: {body}")]
    Status { status: u16, body: String },
    #[error("search API rejected the credentials (HTTP {0})")]
    Unauthorized(u16),
    #[error("search API kept rate limiting after {attempts} attempts")]
    RateLimited { attempts: u32 },
    #[error("could not decode search response: {0}")]
    Decode(String),
    #[error("fixture {path}: {message}")]
    Fixture { path: PathBuf, message: String },
}

impl SearchError {
    /// Errors that will not go away for the rest of the run.
    pub fn is_fatal(&self) -> bool {
        matches!(self, SearchError::Unauthorized(_))
    }
}

/// A web-search service.
#[async_trait]
pub trait SearchBackend: Send + Sync {
    /// At most `top_k` results, in the order the service ranked them.
    async fn search(&self, query: &str, top_k: usize) -> Result<Vec<SearchResult>, SearchError>;
}

#[async_trait]
impl<T: SearchBackend + ?Sized> SearchBackend for Box<T> {
    async fn search(&self, query: &str, top_k: usize) -> Result<Vec<SearchResult>, SearchError> {
        (**self).search(query, top_k).await
    }
}

#[async_trait]
impl<T: SearchBackend + ?Sized> SearchBackend for std::sync::Arc<T> {
    async fn search(&self, query: &str, top_k: usize) -> Result<Vec<SearchResult>, SearchError> {
        (**self).search(query, top_k).await
    }
}

/// Keeps the results whose score is at least `threshold`, in input order.
/// A score equal to the threshold is kept.
pub fn filter_by_relevance(results: Vec<SearchResult>, threshold: f64) -> Vec<SearchResult> {
    results.into_iter().filter(|r| r.score >= threshold).collect()
}

#[cfg(test)]
pub(crate) fn hit(url: &str, score: f64) -> SearchResult {
    SearchResult {
        title: format!("title for {url}"),
        url: url.to_owned(),
        content: format!("snippet for {url}"),
        score,
        raw_content: None,
        favicon: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn urls(results: &[SearchResult]) -> Vec<&str> {
        results.iter().map(|r| r.url.as_str()).collect()
    }

    #[test]
    fn parses_listing_shape() {
        let json = r#"{
            "title": "Lionel Messi Facts | Britannica",
            "url": "https://www.britannica.com/facts/Lionel-Messi",
            "content": "Lionel Messi, an Argentine footballer...",
            "score": 0.81025416,
            "raw_content": null,
            "favicon": "https://britannica.com/favicon.png"
        }"#;
        let parsed: SearchResult = serde_json::from_str(json).unwrap();
        assert_eq!(parsed.score, 0.81025416);
        assert_eq!(parsed.raw_content, None);
        assert_eq!(parsed.favicon.as_deref(), Some("https://britannica.com/favicon.png"));
        assert!(parsed.is_valid());

        let back = serde_json::to_value(&parsed).unwrap();
        let keys: Vec<_> = back.as_object().unwrap().keys().cloned().collect();
        assert_eq!(keys.len(), 6);
        for key in ["title", "url", "content", "score", "raw_content", "favicon"] {
            assert!(keys.iter().any(|k| k == key), "{key}");
        }
    }

    #[test]
    fn filter_keeps_boundary_and_exemplar() {
        let results = vec![hit("a", 0.81025416), hit("b", 0.31), hit("c", 0.29)];
        assert_eq!(urls(&filter_by_relevance(results, 0.30)), ["a", "b"]);

        let at_boundary = vec![hit("x", 0.30), hit("y", 0.2999999)];
        assert_eq!(urls(&filter_by_relevance(at_boundary, 0.30)), ["x"]);
    }

    #[test]
    fn filter_worker_example() {
        let results = [0.81, 0.6, 0.31, 0.29, 0.05]
            .iter()
            .enumerate()
            .map(|(i, &s)| hit(&format!("u{i}"), s))
            .collect();
        assert_eq!(urls(&filter_by_relevance(results, 0.30)), ["u0", "u1", "u2"]);
    }

    #[test]
    fn filter_extremes() {
        let results = vec![hit("a", 0.0), hit("b", 0.5), hit("c", 0.99)];
        assert_eq!(filter_by_relevance(results.clone(), 0.0), results);
        assert!(filter_by_relevance(results, 1.0).is_empty());
    }

    #[test]
    fn rejects_out_of_range_scores() {
        assert!(!hit("a", 1.2).is_valid());
        assert!(!hit("a", -0.1).is_valid());
        assert!(!hit("", 0.5).is_valid());
    }

    proptest! {
        #[test]
        fn filter_is_threshold_subsequence(
            scores in prop::collection::vec(0.0f64..=1.0, 0..20),
            threshold in 0.0f64..=1.0,
        ) {
            let input: Vec<_> = scores.iter().enumerate().map(|(i, &s)| hit(&i.to_string(), s)).collect();
            let output = filter_by_relevance(input.clone(), threshold);
            // Oracle: direct comparison of each score.
            let expected: Vec<_> = input.iter().filter(|r| r.score >= threshold).cloned().collect();
            prop_assert_eq!(&output, &expected);
            for r in &input {
                let kept = output.iter().any(|o| o.url == r.url);
                prop_assert_eq!(kept, r.score >= threshold);
            }
        }
    }
}
