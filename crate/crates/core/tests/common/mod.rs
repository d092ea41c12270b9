#![allow(dead_code)]

use std::collections::BTreeSet;
use std::path::PathBuf;

use arbor_core::llm::ScriptedBehavior;
use arbor_core::search::{SearchBackend, SearchError, SearchResult};
use async_trait::async_trait;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const INVESTMENT_ROOT: &str =
    "What are the investment philosophies of Duan Yongping, Warren Buffett and Charlie Munger?";

pub fn sample_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/sample_d2b3")
}

/// Root splits into three supervisors, each splitting into three workers.
pub fn investment_tree() -> (ScriptedBehavior, Vec<String>) {
    let supervisors = [
        "What are the core tenets of Warren Buffett's investment philosophy?",
        "What are the key elements of Charlie Munger's investment philosophy?",
        "What is Duan Yongping's investment philosophy, and how has it been influenced by Buffett and Munger?",
    ];
    let workers = [
        [
            "Warren Buffett's circle of competence",
            "Warren Buffett's economic moats",
            "Warren Buffett's margin of safety",
        ],
        [
            "Charlie Munger's core value investing principles",
            "Charlie Munger's latticework of mental models",
            "Charlie Munger's psychology of human misjudgment",
        ],
        [
            "Duan Yongping's principle of Benfen",
            "Buffett and Munger's influence on Duan Yongping",
            "Duan Yongping's technology and consumer electronics investments",
        ],
    ];
    let mut behavior = ScriptedBehavior::default().split(INVESTMENT_ROOT, &supervisors);
    let mut expected = Vec::new();
    for (sup, leaves) in supervisors.iter().zip(workers) {
        behavior = behavior.split(sup, &leaves);
        expected.extend(leaves.iter().map(|s| s.to_string()));
    }
    (behavior, expected)
}

/// Every node of the generated tree has between 0 and `max_children` scripted
/// sub-queries and a random split answer. Some children reuse an earlier
/// topic so the uniqueness gate gets exercised.
pub fn random_behavior(seed: u64, depth: u32, max_children: u32) -> ScriptedBehavior {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut behavior = ScriptedBehavior::default();
    let mut seen: Vec<String> = Vec::new();
    let mut frontier = vec![("t".to_string(), depth)];
    while let Some((topic, remaining)) = frontier.pop() {
        if remaining == 0 || behavior.split_answers.contains_key(&topic) {
            continue;
        }
        let splits = rng.random_bool(0.75);
        behavior.split_answers.insert(topic.clone(), splits);
        let st_max = rng.random_range(0..=max_children);
        let mut children = Vec::new();
        for i in 0..st_max {
            let child = if !seen.is_empty() && rng.random_bool(0.1) {
                seen[rng.random_range(0..seen.len())].clone()
            } else {
                format!("{topic}.{}", i + 1)
            };
            seen.push(child.clone());
            children.push(child.clone());
            frontier.push((child, remaining - 1));
        }
        behavior.decompositions.insert(topic, children);
    }
    behavior
}

/// Sequential re-statement of the agent recursion over the scripted tables,
/// with no I/O. Returns the (topic, level) of each section in visit order.
pub fn traverse(behavior: &ScriptedBehavior, topic: &str, depth: u32, breadth: u32) -> Vec<(String, u32)> {
    fn visit(
        b: &ScriptedBehavior,
        topic: &str,
        depth: u32,
        breadth: u32,
        level: u32,
        done: &mut Vec<(String, u32)>,
    ) {
        let split = depth > 0 && b.split_answers.get(topic).copied().unwrap_or(false);
        if split {
            let subs: Vec<&String> = b
                .decompositions
                .get(topic)
                .map(|v| v.iter().filter(|s| !s.trim().is_empty()).take(breadth as usize).collect())
                .unwrap_or_default();
            if !subs.is_empty() {
                let child_breadth = if breadth > 2 { breadth - 2 } else { 1 };
                for sub in subs {
                    visit(b, sub, depth - 1, child_breadth, level + 1, done);
                }
                return;
            }
        }
        let duplicate = done.iter().any(|(t, _)| t == topic);
        if !duplicate {
            done.push((topic.to_string(), level));
        }
    }
    let mut done = Vec::new();
    visit(behavior, topic, depth, breadth, 0, &mut done);
    done
}

/// One deterministic hit per query, URL derived from the query.
pub struct EchoSearch;

#[async_trait]
impl SearchBackend for EchoSearch {
    async fn search(&self, query: &str, top_k: usize) -> Result<Vec<SearchResult>, SearchError> {
        let slug: String = query.chars().map(|c| if c.is_alphanumeric() { c } else { '-' }).collect();
        let hits = vec![
            SearchResult {
                title: query.to_owned(),
                url: format!("https://search.example/{slug}"),
                content: format!("About {query}"),
                score: 0.8,
                raw_content: None,
                favicon: None,
            },
            SearchResult {
                title: "shared".into(),
                url: "https://search.example/shared".into(),
                content: "Shared background".into(),
                score: 0.5,
                raw_content: None,
                favicon: None,
            },
            SearchResult {
                title: "weak".into(),
                url: format!("https://weak.example/{slug}"),
                content: "Barely related".into(),
                score: 0.1,
                raw_content: None,
                favicon: None,
            },
        ];
        Ok(hits.into_iter().take(top_k).collect())
    }
}

pub fn unique<T: Ord + Clone>(items: &[T]) -> bool {
    items.iter().cloned().collect::<BTreeSet<_>>().len() == items.len()
}
