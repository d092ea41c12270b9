//! Supervisor, independent and worker agents.
//!
//! A supervisor either hands its topic to an independent agent (when depth
//! remains and the split gate says the topic divides) or to a worker (when
//! the uniqueness gate says the topic is new). The independent agent
//! decomposes the topic, runs one child supervisor per sub-query with depth
//! minus one and reduced breadth, and merges the children's contributions in
//! order. Workers search, filter by relevance, and write one section.
//!
//! Execution is sequential, depth-first and left-to-right, so every gate sees
//! exactly the topics researched before it and the output is reproducible.

mod runlog;

use std::future::Future;
use std::pin::Pin;

use thiserror::Error;

use crate::config::{AgentConfig, ConfigError};
use crate::llm::{LlmBackend, LlmError};
use crate::report::{assemble_report, ReportDocument, ReportError};
use crate::scheduler::{child_breadth, child_depth, effective_sub_topic_count};
use crate::search::{filter_by_relevance, SearchBackend, SearchError};
use crate::state::{ResearchState, SectionReport};

pub use runlog::{AgentRole, NodeId, RunEvent, RunLog};

#[derive(Debug, Error)]
pub enum AgentError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("research topic is empty")]
    EmptyTopic,
    #[error("every research subtree failed or was skipped; no sections were produced")]
    EmptyResearch,
    #[error("fatal LLM error: {0}")]
    Llm(LlmError),
    #[error("fatal search error: {0}")]
    Search(SearchError),
}

/// Failure inside one subtree. Non-fatal ones abort only that subtree.
#[derive(Debug, Error)]
enum StepError {
    #[error("{0}")]
    Llm(#[from] LlmError),
    #[error("{0}")]
    Search(#[from] SearchError),
    #[error(transparent)]
    Fatal(#[from] AgentError),
}

impl StepError {
    fn into_fatal(self) -> Result<String, AgentError> {
        match self {
            StepError::Llm(e) if e.is_fatal() => Err(AgentError::Llm(e)),
            StepError::Search(e) if e.is_fatal() => Err(AgentError::Search(e)),
            StepError::Fatal(e) => Err(e),
            other => Ok(other.to_string()),
        }
    }
}

type Step<'a> = Pin<Box<dyn Future<Output = Result<ResearchState, AgentError>> + Send + 'a>>;

pub struct Orchestrator<L, S> {
    config: AgentConfig,
    llm: L,
    search: S,
    log: RunLog,
}

impl<L: LlmBackend, S: SearchBackend> Orchestrator<L, S> {
    pub fn new(config: AgentConfig, llm: L, search: S) -> Result<Self, ConfigError> {
        Self::with_log(config, llm, search, RunLog::new())
    }

    pub fn with_log(config: AgentConfig, llm: L, search: S, log: RunLog) -> Result<Self, ConfigError> {
        config.validate()?;
        Ok(Self {
            config,
            llm,
            search,
            log,
        })
    }

    pub fn config(&self) -> &AgentConfig {
        &self.config
    }

    pub fn llm(&self) -> &L {
        &self.llm
    }

    pub fn search(&self) -> &S {
        &self.search
    }

    pub fn log(&self) -> &RunLog {
        &self.log
    }

    /// Researches `topic` end to end and assembles the report.
    pub async fn deep_research(&self, topic: &str) -> Result<ReportDocument, AgentError> {
        let state = self.research_state(topic).await?;
        assemble_report(&state, topic).map_err(|e| match e {
            ReportError::EmptyResearch => AgentError::EmptyResearch,
            ReportError::Io { .. } => unreachable!("assembly does no I/O"),
        })
    }

    /// Runs the agent tree from the root and returns the final state.
    pub async fn research_state(&self, topic: &str) -> Result<ResearchState, AgentError> {
        if topic.trim().is_empty() {
            return Err(AgentError::EmptyTopic);
        }
        let root = ResearchState::new_root(topic, &self.config)?;
        self.run_supervisor(NodeId::root(), root).await
    }

    /// Supervisor for `state.current_topic` at `state.current_depth` and
    /// `state.current_breadth`. A non-fatal failure anywhere in its own steps
    /// leaves `state` as it was.
    pub fn run_supervisor(&self, node: NodeId, state: ResearchState) -> Step<'_> {
        Box::pin(async move {
            let before = state.clone();
            match self.supervise(&node, state).await {
                Ok(state) => Ok(state),
                Err(err) => {
                    let reason = err.into_fatal()?;
                    self.log.record(&node, AgentRole::Supervisor, "abort", reason);
                    Ok(before)
                }
            }
        })
    }

    async fn supervise(&self, node: &NodeId, state: ResearchState) -> Result<ResearchState, StepError> {
        let can_split = if state.current_depth > 0 {
            let answer = self.llm.can_split(&state.current_topic).await?;
            self.log
                .record(node, AgentRole::Supervisor, "split_gate", if answer { "yes" } else { "no" });
            answer
        } else {
            false
        };
        if can_split {
            self.independent(node, state).await
        } else {
            self.gated_worker(node, AgentRole::Supervisor, state).await
        }
    }

    /// Decomposes the current topic and runs one child supervisor per
    /// sub-query, merging results in order. Requires `current_depth >= 1`.
    pub fn run_independent(&self, node: NodeId, state: ResearchState) -> Step<'_> {
        Box::pin(async move {
            let before = state.clone();
            match self.independent(&node, state).await {
                Ok(state) => Ok(state),
                Err(err) => {
                    let reason = err.into_fatal()?;
                    self.log.record(&node, AgentRole::Independent, "abort", reason);
                    Ok(before)
                }
            }
        })
    }

    async fn independent(&self, node: &NodeId, mut state: ResearchState) -> Result<ResearchState, StepError> {
        let Some(depth) = child_depth(state.current_depth) else {
            // Only reachable through a direct call at depth 0.
            return self.gated_worker(node, AgentRole::Independent, state).await;
        };
        let breadth = child_breadth(state.current_breadth);
        // The backend realizes min(st_max, breadth) by returning at most
        // `breadth` sub-queries; anything longer is cut here as well.
        let max_count = effective_sub_topic_count(u32::MAX, state.current_breadth) as usize;
        let mut sub_queries = self.llm.decompose(&state.current_topic, max_count).await?;
        sub_queries.truncate(max_count);

        if sub_queries.is_empty() {
            self.log
                .record(node, AgentRole::Independent, "decompose", "0 sub-queries, researching directly");
            return self.gated_worker(node, AgentRole::Independent, state).await;
        }
        self.log.record(
            node,
            AgentRole::Independent,
            "decompose",
            format!("{} sub-queries", sub_queries.len()),
        );

        for (position, query) in (1u32..).zip(sub_queries) {
            let child = state.spawn_child(query, depth, breadth);
            let result = self.run_supervisor(node.child(position), child).await?;
            state = state.merge_child(result);
        }
        Ok(state)
    }

    async fn gated_worker(
        &self,
        node: &NodeId,
        role: AgentRole,
        state: ResearchState,
    ) -> Result<ResearchState, StepError> {
        let unique = self
            .llm
            .is_different(&state.current_topic, &state.past_topics)
            .await?;
        if unique {
            self.log.record(node, role, "uniqueness_gate", "unique");
            self.worker(node, state).await
        } else {
            self.log.record(node, role, "uniqueness_gate", "duplicate, skipped");
            Ok(state)
        }
    }

    /// Researches `state.current_topic` directly and appends one section.
    /// On a non-fatal failure nothing is appended.
    pub async fn run_worker(&self, node: NodeId, state: ResearchState) -> Result<ResearchState, AgentError> {
        let before = state.clone();
        match self.worker(&node, state).await {
            Ok(state) => Ok(state),
            Err(err) => {
                let reason = err.into_fatal()?;
                self.log.record(&node, AgentRole::Worker, "abort", reason);
                Ok(before)
            }
        }
    }

    async fn worker(&self, node: &NodeId, mut state: ResearchState) -> Result<ResearchState, StepError> {
        let topic = state.current_topic.clone();
        let results = self.search.search(&topic, self.config.search_top_k).await?;
        let total = results.len();
        let evidence = filter_by_relevance(results, self.config.relevance_threshold);
        self.log.record(
            node,
            AgentRole::Worker,
            "search",
            format!("{total} results, {} kept", evidence.len()),
        );

        let body = self.llm.write_section(&topic, &evidence).await?;
        let report = SectionReport {
            citations: evidence.into_iter().map(|hit| hit.url).collect(),
            topic,
            body,
            order_index: state.next_order_index(),
            level: node.level(),
        };
        self.log.record(
            node,
            AgentRole::Worker,
            "write_section",
            format!("section {} with {} citations", report.order_index, report.citations.len()),
        );
        state.record_section(report);
        Ok(state)
    }
}
