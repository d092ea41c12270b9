//! Final report assembly and markdown rendering.
//!
//! A rendered report has a title line, a numbered table of contents, the
//! report body with one heading per section, and a bulleted citation list:
//!
//! ```text
//! # <root topic>
//!
//! ## Table of Contents
//!
//! 1. <first section topic>
//!
//! ## Report
//!
//! ### <first section topic>        (heading depth 2 + section level, max 6)
//!
//! <body>
//!
//! ## Citations
//!
//! - <url>
//! ```

use std::collections::HashSet;
use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write as _};
use std::path::{Path, PathBuf};

use serde::Serialize;
use thiserror::Error;

use crate::state::{ResearchState, SectionReport};

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("research produced no sections")]
    EmptyResearch,
    #[error("cannot write report to {}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReportDocument {
    pub root_topic: String,
    /// `toc[i] == sections[i].topic`.
    pub toc: Vec<String>,
    /// Sorted by `order_index`.
    pub sections: Vec<SectionReport>,
    /// Unique URLs in first-occurrence order across sections.
    pub citations: Vec<String>,
}

/// Builds the report from a finished run. Sections appear in research order.
pub fn assemble_report(state: &ResearchState, root_topic: &str) -> Result<ReportDocument, ReportError> {
    if state.past_reports.is_empty() {
        return Err(ReportError::EmptyResearch);
    }
    let mut sections = state.past_reports.clone();
    sections.sort_by_key(|s| s.order_index);

    let toc = sections.iter().map(|s| s.topic.clone()).collect();
    let mut seen = HashSet::new();
    let citations = sections
        .iter()
        .flat_map(|s| &s.citations)
        .filter(|url| seen.insert(url.as_str()))
        .cloned()
        .collect();

    Ok(ReportDocument {
        root_topic: root_topic.to_owned(),
        toc,
        sections,
        citations,
    })
}

fn single_line(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}

pub fn render_markdown(doc: &ReportDocument) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# {}", single_line(&doc.root_topic));

    out.push_str("\n## Table of Contents\n\n");
    for (i, topic) in doc.toc.iter().enumerate() {
        let _ = writeln!(out, "{}. {}", i + 1, single_line(topic));
    }

    out.push_str("\n## Report\n");
    for section in &doc.sections {
        let depth = (2 + section.level as usize).min(6);
        let _ = write!(out, "\n{} {}\n\n", "#".repeat(depth), single_line(&section.topic));
        let body = section.body.replace("\r\n", "\n");
        let _ = writeln!(out, "{}", body.trim());
    }

    out.push_str("\n## Citations\n");
    if !doc.citations.is_empty() {
        out.push('\n');
    }
    for url in &doc.citations {
        let _ = writeln!(out, "- {url}");
    }
    out
}

/// `path` with `.md` appended unless it already ends in `.md`.
pub fn normalize_report_path(path: &Path) -> PathBuf {
    if path.extension().is_some_and(|ext| ext == "md") {
        path.to_path_buf()
    } else {
        let mut name = path.as_os_str().to_owned();
        name.push(".md");
        PathBuf::from(name)
    }
}

/// Writes the rendered report atomically and returns the final path.
pub fn save_report(doc: &ReportDocument, path: &Path) -> Result<PathBuf, ReportError> {
    let path = normalize_report_path(path);
    let io_err = |source| ReportError::Io {
        path: path.clone(),
        source,
    };
    let parent = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    fs::create_dir_all(&parent).map_err(io_err)?;

    let mut tmp = tempfile::Builder::new()
        .prefix(".report-")
        .suffix(".md.tmp")
        .tempfile_in(&parent)
        .map_err(io_err)?;
    tmp.write_all(render_markdown(doc).as_bytes()).map_err(io_err)?;
    tmp.as_file().sync_all().map_err(io_err)?;
    tmp.persist(&path).map_err(|e| io_err(e.error))?;
    Ok(path)
}
