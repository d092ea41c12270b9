//! Deterministic table-driven backend.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use async_trait::async_trait;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{cap_sub_queries, with_no_sources_note, LlmBackend, LlmError};
use crate::search::SearchResult;

/// Overrides the default uniqueness answer for `topic`.
///
/// With `past_digest` set the rule only applies when the compared past topics
/// hash to that digest (see [`past_set_digest`]); without it, it applies to
/// every comparison of `topic`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UniquenessRule {
    pub topic: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub past_digest: Option<String>,
    pub different: bool,
}

/// Lookup tables for [`ScriptedLlm`]. Missing entries fall back to:
/// not splittable, empty decomposition, literal string inequality against the
/// past topics, and a generated body listing the evidence.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScriptedBehavior {
    pub split_answers: BTreeMap<String, bool>,
    pub decompositions: BTreeMap<String, Vec<String>>,
    pub uniqueness_answers: Vec<UniquenessRule>,
    pub section_bodies: BTreeMap<String, String>,
}

impl ScriptedBehavior {
    pub fn from_json_file(path: &Path) -> Result<Self, std::io::Error> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e))
    }

    /// Marks `topic` splittable into `sub_queries`.
    pub fn split(mut self, topic: &str, sub_queries: &[&str]) -> Self {
        self.split_answers.insert(topic.to_owned(), true);
        self.decompositions
            .insert(topic.to_owned(), sub_queries.iter().map(|s| s.to_string()).collect());
        self
    }

    pub fn duplicate(mut self, topic: &str) -> Self {
        self.uniqueness_answers.push(UniquenessRule {
            topic: topic.to_owned(),
            past_digest: None,
            different: false,
        });
        self
    }

    pub fn body(mut self, topic: &str, body: &str) -> Self {
        self.section_bodies.insert(topic.to_owned(), body.to_owned());
        self
    }
}

/// Order-insensitive digest of a set of past topics: SHA-256 over the sorted,
/// deduplicated topics joined by `\n`, hex encoded.
pub fn past_set_digest(past_topics: &[String]) -> String {
    let mut sorted: Vec<&str> = past_topics.iter().map(String::as_str).collect();
    sorted.sort_unstable();
    sorted.dedup();
    hex::encode(Sha256::digest(sorted.join("\n").as_bytes()))
}

/// Backend answering from a [`ScriptedBehavior`]. Immutable once built, so
/// answers are a pure function of the inputs.
#[derive(Debug, Clone, Default)]
pub struct ScriptedLlm {
    behavior: ScriptedBehavior,
}

impl ScriptedLlm {
    pub fn new(behavior: ScriptedBehavior) -> Self {
        Self { behavior }
    }

    pub fn behavior(&self) -> &ScriptedBehavior {
        &self.behavior
    }

    fn default_body(topic: &str, evidence: &[SearchResult]) -> String {
        let mut body = format!("Research notes on: {topic}\n");
        if !evidence.is_empty() {
            body.push('\n');
        }
        for hit in evidence {
            let _ = writeln!(body, "- {} ({})", hit.content.trim(), hit.url);
        }
        body
    }
}

#[async_trait]
impl LlmBackend for ScriptedLlm {
    async fn can_split(&self, topic: &str) -> Result<bool, LlmError> {
        Ok(self.behavior.split_answers.get(topic).copied().unwrap_or(false))
    }

    async fn decompose(&self, topic: &str, max_count: usize) -> Result<Vec<String>, LlmError> {
        let raw = self.behavior.decompositions.get(topic).cloned().unwrap_or_default();
        Ok(cap_sub_queries(topic, raw, max_count))
    }

    async fn is_different(&self, topic: &str, past_topics: &[String]) -> Result<bool, LlmError> {
        if past_topics.is_empty() {
            return Ok(true);
        }
        let rules = self.behavior.uniqueness_answers.iter().filter(|r| r.topic == topic);
        let mut wildcard = None;
        let mut digest = None;
        for rule in rules {
            match &rule.past_digest {
                None => wildcard = wildcard.or(Some(rule.different)),
                Some(expected) => {
                    let actual = digest.get_or_insert_with(|| past_set_digest(past_topics));
                    if expected == actual {
                        return Ok(rule.different);
                    }
                }
            }
        }
        Ok(wildcard.unwrap_or_else(|| !past_topics.iter().any(|p| p == topic)))
    }

    async fn write_section(&self, topic: &str, evidence: &[SearchResult]) -> Result<String, LlmError> {
        let body = match self.behavior.section_bodies.get(topic) {
            Some(body) => body.clone(),
            None => Self::default_body(topic, evidence),
        };
        Ok(if evidence.is_empty() {
            with_no_sources_note(body)
        } else {
            body
        })
    }
}
