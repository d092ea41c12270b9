use std::path::PathBuf;

use arbor_core::config::DEFAULT_MODEL_ID;
use chrono::{DateTime, Local};
use clap::error::ErrorKind;
use clap::{CommandFactory, Parser, ValueEnum};

use crate::run::SCRIPT_FILE_NAME;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BackendMode {
    /// HTTP chat-completion LLM and web search API.
    Live,
    /// Scripted LLM answers and recorded search results from --fixture-dir.
    Scripted,
}

/// A validated command line.
#[derive(Debug, Clone, PartialEq)]
pub struct CliInvocation {
    pub topic: String,
    pub depth: u32,
    pub breadth: u32,
    pub model: String,
    pub output: PathBuf,
    pub backend_mode: BackendMode,
    pub fixture_dir: Option<PathBuf>,
    pub dry_run: bool,
}

const ENV_HELP: &str = "\
Environment (live mode):
  ARBOR_LLM_API_KEY       API key for the chat-completion endpoint (required)
  ARBOR_SEARCH_API_KEY    API key for the web search endpoint (required)
  ARBOR_LLM_ENDPOINT      chat-completion URL (default: Gemini OpenAI-compatible endpoint)
  ARBOR_SEARCH_ENDPOINT   search URL (default: https://api.tavily.com/search)

Exit codes: 0 report written, 1 usage, 2 missing credentials, 3 empty research, 4 fatal backend error";

#[derive(Debug, Parser)]
#[command(
    name = "arbor",
    version,
    about = "Recursively research a topic and write a markdown report",
    after_help = ENV_HELP,
    allow_negative_numbers = true
)]
struct Args {
    /// Research topic or question.
    #[arg(long)]
    topic: String,
    /// Decomposition levels available below the root.
    #[arg(long, default_value_t = 2)]
    depth: i64,
    /// Maximum sub-topics per decomposition at the root.
    #[arg(long, default_value_t = 5)]
    breadth: i64,
    /// LLM model identifier.
    #[arg(long, default_value = DEFAULT_MODEL_ID)]
    model: String,
    /// Report path [default: <topic-slug>-<timestamp>.md]
    #[arg(long, short)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = BackendMode::Live)]
    backend_mode: BackendMode,
    /// Directory with script.json and recorded search results (scripted mode).
    #[arg(long)]
    fixture_dir: Option<PathBuf>,
    /// Print the call budget for this depth and breadth, then exit.
    #[arg(long)]
    dry_run: bool,
}

/// Parses and validates `argv` (including the program name).
///
/// Help and version requests come back as errors of kind
/// [`ErrorKind::DisplayHelp`] / [`ErrorKind::DisplayVersion`].
pub fn parse_args<I, T>(argv: I) -> Result<CliInvocation, clap::Error>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    parse_args_at(argv, Local::now())
}

/// [`parse_args`] with a fixed clock for the default output name.
pub fn parse_args_at<I, T>(argv: I, now: DateTime<Local>) -> Result<CliInvocation, clap::Error>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let args = Args::try_parse_from(argv)?;
    let invalid = |msg: String| Args::command().error(ErrorKind::ValueValidation, msg);

    if args.topic.trim().is_empty() {
        return Err(invalid("--topic must not be empty".into()));
    }
    let depth = u32::try_from(args.depth)
        .map_err(|_| invalid(format!("--depth must be 0 or greater, got {}", args.depth)))?;
    let breadth = u32::try_from(args.breadth)
        .ok()
        .filter(|b| *b >= 1)
        .ok_or_else(|| invalid(format!("--breadth must be 1 or greater, got {}", args.breadth)))?;
    if args.model.trim().is_empty() {
        return Err(invalid("--model must not be empty".into()));
    }
    if args.backend_mode == BackendMode::Scripted {
        let Some(dir) = &args.fixture_dir else {
            return Err(Args::command().error(
                ErrorKind::MissingRequiredArgument,
                "--backend-mode scripted requires --fixture-dir",
            ));
        };
        if !dir.join(SCRIPT_FILE_NAME).is_file() {
            return Err(invalid(format!(
                "--fixture-dir {} has no {SCRIPT_FILE_NAME}",
                dir.display()
            )));
        }
    }

    let output = args.output.unwrap_or_else(|| default_output_path(&args.topic, now));
    Ok(CliInvocation {
        topic: args.topic.trim().to_owned(),
        depth,
        breadth,
        model: args.model,
        output,
        backend_mode: args.backend_mode,
        fixture_dir: args.fixture_dir,
        dry_run: args.dry_run,
    })
}

/// `<slug>-<YYYYmmdd-HHMMSS>.md` in the working directory.
pub fn default_output_path(topic: &str, now: DateTime<Local>) -> PathBuf {
    PathBuf::from(format!("{}-{}.md", slugify(topic), now.format("%Y%m%d-%H%M%S")))
}

/// Lowercase ASCII alphanumerics joined by single dashes, at most 60 chars.
pub fn slugify(topic: &str) -> String {
    let mut slug = String::new();
    for word in topic
        .split(|c: char| !c.is_ascii_alphanumeric())
        .filter(|w| !w.is_empty())
    {
        if slug.len() + word.len() + 1 > 60 && !slug.is_empty() {
            break;
        }
        if !slug.is_empty() {
            slug.push('-');
        }
        slug.push_str(&word.to_ascii_lowercase());
    }
    slug.truncate(60);
    if slug.is_empty() {
        slug.push_str("report");
    }
    slug
}
