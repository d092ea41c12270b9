use std::fmt;
use std::io::Write;
use std::path::PathBuf;

use arbor_core::llm::{HttpChatTransport, ScriptedBehavior};
use arbor_core::search::TavilySettings;
use arbor_core::{
    max_worker_topics, save_report, AgentConfig, AgentError, ChatLlm, CountingLlm, CountingSearch, FixtureSearch,
    LlmBackend, LlmCallCounts, LlmRequestPolicy, Orchestrator, RunLog, SearchBackend, TavilySearch,
};

use crate::args::{BackendMode, CliInvocation};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_CREDENTIALS: i32 = 2;
pub const EXIT_EMPTY_RESEARCH: i32 = 3;
pub const EXIT_BACKEND: i32 = 4;

pub const LLM_API_KEY_VAR: &str = "ARBOR_LLM_API_KEY";
pub const SEARCH_API_KEY_VAR: &str = "ARBOR_SEARCH_API_KEY";
pub const LLM_ENDPOINT_VAR: &str = "ARBOR_LLM_ENDPOINT";
pub const SEARCH_ENDPOINT_VAR: &str = "ARBOR_SEARCH_ENDPOINT";

pub const DEFAULT_LLM_ENDPOINT: &str = "https://generativelanguage.googleapis.com/v1beta/openai/chat/completions";

/// Scripted-behavior file expected inside `--fixture-dir`.
pub const SCRIPT_FILE_NAME: &str = "script.json";

/// Call budget for a depth/breadth pair, computed without touching any backend.
pub fn run_dry_run(inv: &CliInvocation) -> String {
    let est = max_worker_topics(inv.depth, inv.breadth);
    let gates = est.gate_call_bound();
    format!(
        "dry run: no backend calls made\n\
         topic: {}\n\
         depth: {}  breadth: {}  model: {}\n\
         per-level caps: {:?}\n\
         max worker topics: {}\n\
         upper bound on split-gate calls: {gates}\n\
         upper bound on uniqueness-gate calls: {gates}\n\
         upper bound on decomposition calls: {}\n\
         upper bound on section-writing calls: {}\n",
        inv.topic,
        inv.depth,
        inv.breadth,
        inv.model,
        est.per_level_caps,
        est.max_worker_topics,
        est.internal_nodes(),
        est.max_worker_topics,
    )
}

/// What a completed run produced.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunSummary {
    pub output: PathBuf,
    pub sections: usize,
    pub citations: usize,
    pub llm_calls: LlmCallCounts,
    pub search_calls: u64,
    pub aborted_subtrees: usize,
}

impl fmt::Display for RunSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = &self.llm_calls;
        writeln!(f, "report: {}", self.output.display())?;
        writeln!(f, "sections: {}", self.sections)?;
        writeln!(f, "citations: {}", self.citations)?;
        writeln!(
            f,
            "llm calls: {} (split {}, decompose {}, uniqueness {}, write {})",
            c.total(),
            c.split,
            c.decompose,
            c.uniqueness,
            c.write_section
        )?;
        writeln!(f, "search calls: {}", self.search_calls)
    }
}

/// Result of [`execute`]: the exit code and, when a report was written, its summary.
#[derive(Debug)]
pub struct Outcome {
    pub code: i32,
    pub summary: Option<RunSummary>,
}

impl Outcome {
    fn fail(code: i32) -> Self {
        Self { code, summary: None }
    }
}

/// Runs `inv` against the given backends. Dry runs return before either
/// backend is touched.
pub async fn execute<L, S>(
    inv: &CliInvocation,
    llm: L,
    search: S,
    log: RunLog,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Outcome
where
    L: LlmBackend,
    S: SearchBackend,
{
    if inv.dry_run {
        let _ = out.write_all(run_dry_run(inv).as_bytes());
        return Outcome::fail(EXIT_OK);
    }

    let mut config = AgentConfig::new(inv.depth, inv.breadth);
    config.model_id = inv.model.clone();
    config.output_path = inv.output.clone();
    let orch = match Orchestrator::with_log(config, CountingLlm::new(llm), CountingSearch::new(search), log) {
        Ok(orch) => orch,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return Outcome::fail(EXIT_USAGE);
        }
    };

    let result = orch.deep_research(&inv.topic).await;
    let aborted = orch.log().failures();
    if aborted > 0 {
        let _ = writeln!(err, "warning: {aborted} subtree(s) aborted, see the run log");
    }
    let doc = match result {
        Ok(doc) => doc,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            let code = match e {
                AgentError::EmptyResearch => EXIT_EMPTY_RESEARCH,
                AgentError::Config(_) | AgentError::EmptyTopic => EXIT_USAGE,
                AgentError::Llm(_) | AgentError::Search(_) => EXIT_BACKEND,
            };
            return Outcome::fail(code);
        }
    };

    let output = match save_report(&doc, &inv.output) {
        Ok(path) => path,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return Outcome::fail(EXIT_BACKEND);
        }
    };
    let summary = RunSummary {
        output,
        sections: doc.sections.len(),
        citations: doc.citations.len(),
        llm_calls: orch.llm().counts(),
        search_calls: orch.search().calls(),
        aborted_subtrees: aborted,
    };
    let _ = write!(out, "{summary}");
    Outcome {
        code: EXIT_OK,
        summary: Some(summary),
    }
}

/// Builds the backends `inv` asks for and runs it. `env` looks up
/// environment variables so tests can supply their own.
pub async fn run_main(
    inv: &CliInvocation,
    env: impl Fn(&str) -> Option<String>,
    log: RunLog,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> i32 {
    if inv.dry_run {
        let _ = out.write_all(run_dry_run(inv).as_bytes());
        return EXIT_OK;
    }
    match inv.backend_mode {
        BackendMode::Scripted => {
            // parse_args guarantees the directory and script file exist.
            let dir = inv.fixture_dir.clone().unwrap_or_default();
            let behavior = match ScriptedBehavior::from_json_file(&dir.join(SCRIPT_FILE_NAME)) {
                Ok(b) => b,
                Err(e) => {
                    let _ = writeln!(err, "error: cannot load {SCRIPT_FILE_NAME} from {}: {e}", dir.display());
                    return EXIT_USAGE;
                }
            };
            let search = match FixtureSearch::open(&dir) {
                Ok(s) => s,
                Err(e) => {
                    let _ = writeln!(err, "error: {e}");
                    return EXIT_USAGE;
                }
            };
            let llm = arbor_core::ScriptedLlm::new(behavior);
            execute(inv, llm, search, log, out, err).await.code
        }
        BackendMode::Live => {
            let present = |name: &str| env(name).filter(|v| !v.trim().is_empty());
            let missing: Vec<&str> = [LLM_API_KEY_VAR, SEARCH_API_KEY_VAR]
                .into_iter()
                .filter(|name| present(name).is_none())
                .collect();
            if !missing.is_empty() {
                let _ = writeln!(
                    err,
                    "error: missing environment variable(s): {} (see --help)",
                    missing.join(", ")
                );
                return EXIT_CREDENTIALS;
            }
            let llm_key = present(LLM_API_KEY_VAR).unwrap_or_default();
            let search_key = present(SEARCH_API_KEY_VAR).unwrap_or_default();

            let policy = LlmRequestPolicy::new(inv.model.clone());
            let endpoint = present(LLM_ENDPOINT_VAR).unwrap_or_else(|| DEFAULT_LLM_ENDPOINT.to_owned());
            let llm = match HttpChatTransport::new(endpoint, llm_key, policy.timeout) {
                Ok(transport) => ChatLlm::new(transport, policy),
                Err(e) => {
                    let _ = writeln!(err, "error: {e}");
                    return EXIT_BACKEND;
                }
            };
            let mut settings = TavilySettings::new(search_key);
            if let Some(endpoint) = present(SEARCH_ENDPOINT_VAR) {
                settings.endpoint = endpoint;
            }
            let search = match TavilySearch::new(settings) {
                Ok(s) => s,
                Err(e) => {
                    let _ = writeln!(err, "error: {e}");
                    return EXIT_BACKEND;
                }
            };
            execute(inv, llm, search, log, out, err).await.code
        }
    }
}
