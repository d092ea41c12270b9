//! Run-wide parameters for a research run.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default number of search hits requested per worker.
pub const DEFAULT_SEARCH_TOP_K: usize = 5;

/// Default minimum relevance score a search hit needs to be used as evidence.
pub const DEFAULT_RELEVANCE_THRESHOLD: f64 = 0.30;

/// Default LLM model identifier.
pub const DEFAULT_MODEL_ID: &str = "gemini-2.5-pro";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("breadth must be at least 1, got {0}")]
    Breadth(u32),
    #[error("search_top_k must be at least 1, got {0}")]
    SearchTopK(usize),
    #[error("relevance_threshold must lie in [0, 1], got {0}")]
    RelevanceThreshold(f64),
    #[error("model_id must not be empty")]
    EmptyModel,
}

/// Parameters controlling how far and how wide a research run expands.
///
/// `depth` is the number of decomposition levels still available at the root;
/// `breadth` is the maximum fan-out of a decomposition at the root. Breadth
/// shrinks as the tree deepens, see [`crate::scheduler::child_breadth`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentConfig {
    pub depth: u32,
    pub breadth: u32,
    pub model_id: String,
    pub search_top_k: usize,
    pub relevance_threshold: f64,
    pub output_path: PathBuf,
}

impl AgentConfig {
    /// A config with the given depth and breadth and defaults everywhere else.
    pub fn new(depth: u32, breadth: u32) -> Self {
        Self {
            depth,
            breadth,
            model_id: DEFAULT_MODEL_ID.to_owned(),
            search_top_k: DEFAULT_SEARCH_TOP_K,
            relevance_threshold: DEFAULT_RELEVANCE_THRESHOLD,
            output_path: PathBuf::from("report.md"),
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.breadth < 1 {
            return Err(ConfigError::Breadth(self.breadth));
        }
        if self.search_top_k < 1 {
            return Err(ConfigError::SearchTopK(self.search_top_k));
        }
        if !(0.0..=1.0).contains(&self.relevance_threshold) {
            return Err(ConfigError::RelevanceThreshold(self.relevance_threshold));
        }
        if self.model_id.trim().is_empty() {
            return Err(ConfigError::EmptyModel);
        }
        Ok(())
    }
}

impl Default for AgentConfig {
    fn default() -> Self {
        Self::new(2, 5)
    }
}
