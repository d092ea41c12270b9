//! Backend wrappers that count calls.

use std::sync::atomic::{AtomicU64, Ordering};

use async_trait::async_trait;
use serde::Serialize;

use crate::llm::{LlmBackend, LlmError};
use crate::search::{SearchBackend, SearchError, SearchResult};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct LlmCallCounts {
    pub split: u64,
    pub decompose: u64,
    pub uniqueness: u64,
    pub write_section: u64,
}

impl LlmCallCounts {
    pub fn total(&self) -> u64 {
        self.split + self.decompose + self.uniqueness + self.write_section
    }
}

#[derive(Debug, Default)]
pub struct CountingLlm<L> {
    inner: L,
    split: AtomicU64,
    decompose: AtomicU64,
    uniqueness: AtomicU64,
    write_section: AtomicU64,
}

impl<L> CountingLlm<L> {
    pub fn new(inner: L) -> Self {
        Self {
            inner,
            split: AtomicU64::new(0),
            decompose: AtomicU64::new(0),
            uniqueness: AtomicU64::new(0),
            write_section: AtomicU64::new(0),
        }
    }

    pub fn inner(&self) -> &L {
        &self.inner
    }

    pub fn counts(&self) -> LlmCallCounts {
        LlmCallCounts {
            split: self.split.load(Ordering::Relaxed),
            decompose: self.decompose.load(Ordering::Relaxed),
            uniqueness: self.uniqueness.load(Ordering::Relaxed),
            write_section: self.write_section.load(Ordering::Relaxed),
        }
    }
}

#[async_trait]
impl<L: LlmBackend> LlmBackend for CountingLlm<L> {
    async fn can_split(&self, topic: &str) -> Result<bool, LlmError> {
        self.split.fetch_add(1, Ordering::Relaxed);
        self.inner.can_split(topic).await
    }

    async fn decompose(&self, topic: &str, max_count: usize) -> Result<Vec<String>, LlmError> {
        self.decompose.fetch_add(1, Ordering::Relaxed);
        self.inner.decompose(topic, max_count).await
    }

    async fn is_different(&self, topic: &str, past_topics: &[String]) -> Result<bool, LlmError> {
        self.uniqueness.fetch_add(1, Ordering::Relaxed);
        self.inner.is_different(topic, past_topics).await
    }

    async fn write_section(&self, topic: &str, evidence: &[SearchResult]) -> Result<String, LlmError> {
        self.write_section.fetch_add(1, Ordering::Relaxed);
        self.inner.write_section(topic, evidence).await
    }
}

#[derive(Debug, Default)]
pub struct CountingSearch<S> {
    inner: S,
    calls: AtomicU64,
}

impl<S> CountingSearch<S> {
    pub fn new(inner: S) -> Self {
        Self {
            inner,
            calls: AtomicU64::new(0),
        }
    }

    pub fn calls(&self) -> u64 {
        self.calls.load(Ordering::Relaxed)
    }
}

#[async_trait]
impl<S: SearchBackend> SearchBackend for CountingSearch<S> {
    async fn search(&self, query: &str, top_k: usize) -> Result<Vec<SearchResult>, SearchError> {
        self.calls.fetch_add(1, Ordering::Relaxed);
        self.inner.search(query, top_k).await
    }
}
