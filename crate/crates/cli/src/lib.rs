//! Command-line front end: argument parsing, dry-run budgeting, and running
//! a research job against live or scripted backends.

mod args;
mod run;

pub use args::{default_output_path, parse_args, parse_args_at, slugify, BackendMode, CliInvocation};
pub use run::{
    execute, run_dry_run, run_main, Outcome, RunSummary, DEFAULT_LLM_ENDPOINT, EXIT_BACKEND, EXIT_CREDENTIALS,
    EXIT_EMPTY_RESEARCH, EXIT_OK, EXIT_USAGE, LLM_API_KEY_VAR, LLM_ENDPOINT_VAR, SCRIPT_FILE_NAME,
    SEARCH_API_KEY_VAR, SEARCH_ENDPOINT_VAR,
};
