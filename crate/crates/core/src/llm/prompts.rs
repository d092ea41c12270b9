//! Versioned prompt templates, addressable by name.
//!
//! Templates live under `prompts/<version>/<name>.md` in this crate and are
//! compiled in. Placeholders are written `{{name}}`.

use std::fmt::Write as _;

use crate::search::SearchResult;

pub const PROMPT_VERSION: &str = "v1";

pub const SYSTEM: &str = "system";
pub const SPLIT_GATE: &str = "split_gate";
pub const DECOMPOSE: &str = "decompose";
pub const UNIQUENESS_GATE: &str = "uniqueness_gate";
pub const WRITE_SECTION: &str = "write_section";
pub const REPAIR: &str = "repair";

const TEMPLATES: &[(&str, &str)] = &[
    (SYSTEM, include_str!("../../prompts/v1/system.md")),
    (SPLIT_GATE, include_str!("../../prompts/v1/split_gate.md")),
    (DECOMPOSE, include_str!("../../prompts/v1/decompose.md")),
    (UNIQUENESS_GATE, include_str!("../../prompts/v1/uniqueness_gate.md")),
    (WRITE_SECTION, include_str!("../../prompts/v1/write_section.md")),
    (REPAIR, include_str!("../../prompts/v1/repair.md")),
];

pub fn template(name: &str) -> Option<&'static str> {
    TEMPLATES.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
}

pub fn names() -> impl Iterator<Item = &'static str> {
    TEMPLATES.iter().map(|(n, _)| *n)
}

/// Fills the named template. Panics on an unknown name, which is a bug.
pub fn render(name: &str, vars: &[(&str, &str)]) -> String {
    let mut text = template(name)
        .unwrap_or_else(|| panic!("unknown prompt template {name:?}"))
        .to_owned();
    for (key, value) in vars {
        text = text.replace(&format!("{{{{{key}}}}}"), value);
    }
    text
}

pub(crate) fn bullet_list(items: &[String]) -> String {
    if items.is_empty() {
        return "(none)".to_owned();
    }
    items.iter().fold(String::new(), |mut out, item| {
        let _ = writeln!(out, "- {item}");
        out
    })
}

pub(crate) fn evidence_block(evidence: &[SearchResult]) -> String {
    if evidence.is_empty() {
        return "(no search results)".to_owned();
    }
    let mut out = String::new();
    for (i, hit) in evidence.iter().enumerate() {
        let _ = writeln!(out, "{}. {}\n   URL: {}\n   {}", i + 1, hit.title, hit.url, hit.content.trim());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_template_resolves_and_fills() {
        for name in names() {
            assert!(!template(name).unwrap().trim().is_empty(), "{name}");
        }
        let text = render(DECOMPOSE, &[("topic", "Rust"), ("max_count", "3")]);
        assert!(text.contains("Rust") && text.contains("at most 3"));
        assert!(!text.contains("{{"));
        assert!(template("nope").is_none());
    }

    #[test]
    fn write_section_mentions_no_source_note() {
        let text = render(
            WRITE_SECTION,
            &[
                ("topic", "t"),
                ("evidence", &evidence_block(&[])),
                ("no_sources_note", crate::llm::NO_SOURCES_NOTE),
            ],
        );
        assert!(text.contains(crate::llm::NO_SOURCES_NOTE));
        assert!(text.contains("(no search results)"));
    }
}
