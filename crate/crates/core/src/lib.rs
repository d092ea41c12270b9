//! Hierarchical research orchestration with depth and breadth budgets.
//!
//! A topic is recursively decomposed by an LLM into independent sub-topics,
//! each leaf is researched with web search plus LLM synthesis, and the
//! sections are assembled into one markdown report with a table of contents
//! and citations. [`scheduler`] bounds how many workers a run can spawn
//! before any request is made.

pub mod agents;
pub mod config;
pub mod counting;
pub mod llm;
pub mod report;
pub mod retry;
pub mod scheduler;
pub mod search;
pub mod state;

pub use agents::{AgentError, NodeId, Orchestrator, RunEvent, RunLog};
pub use config::{AgentConfig, ConfigError};
pub use counting::{CountingLlm, CountingSearch, LlmCallCounts};
pub use llm::{ChatLlm, LlmBackend, LlmError, LlmRequestPolicy, ScriptedBehavior, ScriptedLlm};
pub use report::{assemble_report, render_markdown, save_report, ReportDocument, ReportError};
pub use scheduler::{max_worker_topics, BudgetEstimate};
pub use search::{filter_by_relevance, FixtureSearch, SearchBackend, SearchError, SearchResult, TavilySearch};
pub use state::{ResearchState, SectionReport};
