//! Shared research state threaded through the agent tree.

use serde::{Deserialize, Serialize};

use crate::config::{AgentConfig, ConfigError};

/// One worker's output.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SectionReport {
    pub topic: String,
    /// Markdown body.
    pub body: String,
    /// Evidence URLs in search-result order, verbatim.
    pub citations: Vec<String>,
    /// Position in canonical (depth-first, left-to-right) research order.
    pub order_index: usize,
    /// Tree depth of the worker; the root is level 0.
    pub level: u32,
}

/// State carried by every supervisor, independent and worker invocation.
///
/// The three `past_*` lists only ever grow. Workers append one topic and one
/// report together, so `past_topics.len() == past_reports.len()` holds at
/// every point where the state can be observed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResearchState {
    pub current_depth: u32,
    pub current_breadth: u32,
    pub current_topic: String,
    pub past_topics: Vec<String>,
    pub past_citations: Vec<String>,
    pub past_reports: Vec<SectionReport>,
}

impl ResearchState {
    /// Root state for a run over `topic`.
    pub fn new_root(topic: impl Into<String>, config: &AgentConfig) -> Result<Self, ConfigError> {
        config.validate()?;
        Ok(Self {
            current_depth: config.depth,
            current_breadth: config.breadth,
            current_topic: topic.into(),
            past_topics: Vec::new(),
            past_citations: Vec::new(),
            past_reports: Vec::new(),
        })
    }

    /// State handed to a child supervisor. The child sees the full history so
    /// far, which is what its uniqueness gate compares against.
    pub fn spawn_child(&self, topic: impl Into<String>, depth: u32, breadth: u32) -> Self {
        Self {
            current_depth: depth,
            current_breadth: breadth,
            current_topic: topic.into(),
            past_topics: self.past_topics.clone(),
            past_citations: self.past_citations.clone(),
            past_reports: self.past_reports.clone(),
        }
    }

    /// Folds a child's contribution back into this state.
    ///
    /// `child` must descend from `self` via [`spawn_child`](Self::spawn_child),
    /// so its lists start with this state's lists; the entries past that prefix
    /// are appended in order. The current depth, breadth and topic of `self`
    /// are left alone.
    pub fn merge_child(mut self, child: ResearchState) -> Self {
        self.past_reports
            .extend(new_entries(&child.past_reports, self.past_reports.len()));
        self.past_citations
            .extend(new_entries(&child.past_citations, self.past_citations.len()));
        self.past_topics
            .extend(new_entries(&child.past_topics, self.past_topics.len()));
        self
    }

    /// Appends one worker's result. Topic, report and citations land together.
    pub(crate) fn record_section(&mut self, report: SectionReport) {
        self.past_topics.push(report.topic.clone());
        self.past_citations.extend(report.citations.iter().cloned());
        self.past_reports.push(report);
    }

    pub fn next_order_index(&self) -> usize {
        self.past_reports.len()
    }
}

fn new_entries<T: Clone>(child: &[T], parent_len: usize) -> impl Iterator<Item = T> + '_ {
    child.get(parent_len..).unwrap_or_default().iter().cloned()
}
