//! Depth/breadth evolution and worker-call budget arithmetic.
//!
//! Breadth shrinks by two per level and never drops below one. The largest
//! number of topics a run can hand to workers is the product of the per-level
//! fan-out caps:
//!
//! ```text
//! max_worker_topics(d, b) = prod_{i=0}^{d-1} max(b - 2i, 1)
//! ```

use serde::Serialize;

/// Depth handed to a child supervisor, or `None` at depth 0 where a supervisor
/// never descends.
pub fn child_depth(current_depth: u32) -> Option<u32> {
    current_depth.checked_sub(1)
}

/// Breadth handed to a child supervisor.
pub fn child_breadth(current_breadth: u32) -> u32 {
    current_breadth.saturating_sub(2).max(1)
}

/// Number of sub-topics a decomposition may produce: a topic that only admits
/// `st_max` independent sub-topics yields `min(st_max, breadth)`.
pub fn effective_sub_topic_count(st_max: u32, current_breadth: u32) -> u32 {
    st_max.min(current_breadth)
}

/// Upper bound on worker invocations for a run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BudgetEstimate {
    pub max_worker_topics: u64,
    /// Fan-out cap at each level `i` in `0..depth`.
    pub per_level_caps: Vec<u32>,
}

impl BudgetEstimate {
    /// Nodes of the fully expanded tree that sit above the leaf level. Each
    /// can cost one split-gate and one decomposition call.
    pub fn internal_nodes(&self) -> u64 {
        self.level_widths()
            .take(self.per_level_caps.len())
            .fold(0, u64::saturating_add)
    }

    /// Upper bound on calls to each gate (split and uniqueness): every node of
    /// the fully expanded tree, internal or leaf.
    pub fn gate_call_bound(&self) -> u64 {
        self.level_widths().fold(0, u64::saturating_add)
    }

    /// Width of each level of the fully expanded tree, root first.
    fn level_widths(&self) -> impl Iterator<Item = u64> + '_ {
        std::iter::once(1u64).chain(self.per_level_caps.iter().scan(1u64, |width, &cap| {
            *width = width.saturating_mul(u64::from(cap));
            Some(*width)
        }))
    }
}

/// Per-level caps and their product for a run at depth `d`, breadth `b`.
/// At `d = 0` the root goes straight to a worker and the bound is 1.
pub fn max_worker_topics(d: u32, b: u32) -> BudgetEstimate {
    let per_level_caps: Vec<u32> = std::iter::successors(Some(b.max(1)), |&w| Some(child_breadth(w)))
        .take(d as usize)
        .collect();
    let max_worker_topics = per_level_caps
        .iter()
        .fold(1u64, |acc, &cap| acc.saturating_mul(u64::from(cap)));
    BudgetEstimate {
        max_worker_topics,
        per_level_caps,
    }
}
