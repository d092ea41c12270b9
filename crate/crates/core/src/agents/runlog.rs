//! Line-oriented record of agent activity.
//!
//! Every event renders as one line of `key=value` pairs:
//!
//! ```text
//! node=2.1 role=supervisor action=split_gate outcome=no
//! node=2.1 role=worker action=search outcome="5 results, 3 kept"
//! ```
//!
//! Node ids are dotted 1-based child positions from the root (`root`, `2`,
//! `2.1`, ...). Values containing whitespace are quoted.

use std::fmt;
use std::io::Write;
use std::sync::Mutex;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct NodeId(Vec<u32>);

impl NodeId {
    pub fn root() -> Self {
        Self(Vec::new())
    }

    /// The `position`-th child (1-based).
    pub fn child(&self, position: u32) -> Self {
        let mut path = self.0.clone();
        path.push(position);
        Self(path)
    }

    /// Tree depth; the root is level 0.
    pub fn level(&self) -> u32 {
        self.0.len() as u32
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("root");
        }
        for (i, p) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(".")?;
            }
            write!(f, "{p}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AgentRole {
    Supervisor,
    Independent,
    Worker,
}

impl fmt::Display for AgentRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AgentRole::Supervisor => "supervisor",
            AgentRole::Independent => "independent",
            AgentRole::Worker => "worker",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunEvent {
    pub node: NodeId,
    pub role: AgentRole,
    pub action: &'static str,
    pub outcome: String,
}

impl RunEvent {
    /// Whether this event records an aborted subtree or worker.
    pub fn is_failure(&self) -> bool {
        self.action == "abort"
    }
}

fn quoted(value: &str) -> String {
    if value.is_empty() || value.contains(char::is_whitespace) || value.contains('"') {
        format!("{value:?}")
    } else {
        value.to_owned()
    }
}

impl fmt::Display for RunEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "node={} role={} action={} outcome={}",
            self.node,
            self.role,
            self.action,
            quoted(&self.outcome)
        )
    }
}

/// Collects events in memory and optionally streams each as a line.
#[derive(Default)]
pub struct RunLog {
    events: Mutex<Vec<RunEvent>>,
    sink: Option<Mutex<Box<dyn Write + Send>>>,
}

impl RunLog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_sink(sink: Box<dyn Write + Send>) -> Self {
        Self {
            events: Mutex::default(),
            sink: Some(Mutex::new(sink)),
        }
    }

    pub fn record(&self, node: &NodeId, role: AgentRole, action: &'static str, outcome: impl Into<String>) {
        let event = RunEvent {
            node: node.clone(),
            role,
            action,
            outcome: outcome.into(),
        };
        if let Some(sink) = &self.sink {
            let mut sink = sink.lock().unwrap_or_else(|e| e.into_inner());
            // Losing a log line must not fail the run.
            let _ = writeln!(sink, "{event}");
        }
        self.events.lock().unwrap_or_else(|e| e.into_inner()).push(event);
    }

    pub fn events(&self) -> Vec<RunEvent> {
        self.events.lock().unwrap_or_else(|e| e.into_inner()).clone()
    }

    pub fn failures(&self) -> usize {
        self.events
            .lock()
            .unwrap_or_else(|e| e.into_inner())
            .iter()
            .filter(|e| e.is_failure())
            .count()
    }
}

impl fmt::Debug for RunLog {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RunLog")
            .field("events", &self.events.lock().map(|e| e.len()).unwrap_or(0))
            .field("sink", &self.sink.is_some())
            .finish()
    }
}
