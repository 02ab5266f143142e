//! Compliance-check processes described with the `proc:` control vocabulary
//! and an interpreter that runs them while emitting events.

mod compose;
mod exec;
mod parse;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::kgstore::Iri;
use crate::query::QueryError;

pub use compose::compose_complex;
pub use exec::{execute, EventListener, ExecutionContext, ViolationCollector, DEFAULT_MAX_DEPTH};
pub use parse::parse_pipeline;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PipelineError {
    #[error("{node}: {message}")]
    Malformed { node: Iri, message: String },
    #[error("step {step} of {pipeline} has no proc:index")]
    MissingIndex { pipeline: Iri, step: Iri },
    #[error("{pipeline} has two steps with index {index}")]
    DuplicateIndex { pipeline: Iri, index: i64 },
    #[error("{node} refers through {property} to {target}, which is not a process")]
    Dangling { node: Iri, property: &'static str, target: String },
    #[error("test {0} has no proc:if condition")]
    TestWithoutIf(Iri),
    #[error("concepts {1:?} of {0} have neither a registered process nor a definition")]
    Uncomposable(Iri, Vec<Iri>),
    #[error("{process}: maximum process depth {max_depth} exceeded")]
    DepthExceeded { process: Iri, max_depth: usize },
    #[error("no process {0} is registered")]
    UnknownProcess(Iri),
    #[error("rule {0} is not in the rulebase")]
    UnknownRule(Iri),
    #[error("resource `{0}` was not loaded")]
    MissingResource(String),
    #[error("{node}: {source}")]
    Query { node: Iri, source: QueryError },
    #[error("listeners must be registered before execution starts")]
    ListenerAfterStart,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum QuerySource {
    Text(String),
    /// The violation query of a rulebase rule.
    Rule(Iri),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RuleSelection {
    Listed(Vec<Iri>),
    /// Rules applying to the concept (every rule when `None`), minus those a
    /// `Rule` process runs explicitly.
    Target(Option<Iri>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ProcessKind {
    Pipeline(Vec<ProcessNode>),
    Pipe(Iri),
    Load(String),
    Query(QuerySource),
    Update(String),
    RuleBase(RuleSelection),
    Rule(Iri),
    Test {
        condition: Box<ProcessNode>,
        then: Option<Box<ProcessNode>>,
        otherwise: Option<Box<ProcessNode>>,
    },
}

impl ProcessKind {
    pub fn name(&self) -> &'static str {
        match self {
            ProcessKind::Pipeline(_) => "Pipeline",
            ProcessKind::Pipe(_) => "Pipe",
            ProcessKind::Load(_) => "Load",
            ProcessKind::Query(_) => "Query",
            ProcessKind::Update(_) => "Update",
            ProcessKind::RuleBase(_) => "RuleBase",
            ProcessKind::Rule(_) => "Rule",
            ProcessKind::Test { .. } => "Test",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProcessNode {
    pub id: Iri,
    pub kind: ProcessKind,
}

impl ProcessNode {
    /// This node and every node nested in it, depth first.
    pub fn walk(&self) -> Vec<&ProcessNode> {
        let mut out = vec![self];
        match &self.kind {
            ProcessKind::Pipeline(body) => body.iter().for_each(|n| out.extend(n.walk())),
            ProcessKind::Test { condition, then, otherwise } => {
                out.extend(condition.walk());
                for branch in [then, otherwise].into_iter().flatten() {
                    out.extend(branch.walk());
                }
            }
            _ => {}
        }
        out
    }

    /// Names of the `Load` and `Update` resources used by this node.
    pub fn resources(&self) -> BTreeSet<&str> {
        self.walk()
            .into_iter()
            .filter_map(|n| match &n.kind {
                ProcessKind::Load(r) | ProcessKind::Update(r) => Some(r.as_str()),
                _ => None,
            })
            .collect()
    }
}

/// Registered processes by IRI.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ProcessRegistry {
    processes: BTreeMap<Iri, ProcessNode>,
    /// Component concept to its elementary process.
    elementary: BTreeMap<Iri, Iri>,
    /// Processes invoked by another process's `Pipe` or nested as a step.
    referenced: BTreeSet<Iri>,
    /// Rules run by an explicit `Rule` process.
    claimed: BTreeSet<Iri>,
}

impl ProcessRegistry {
    pub fn get(&self, id: &Iri) -> Option<&ProcessNode> {
        self.processes.get(id)
    }

    pub fn len(&self) -> usize {
        self.processes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.processes.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &ProcessNode> {
        self.processes.values()
    }

    /// Adds a process, registering it as the elementary process of
    /// `applies_to` when given.
    pub fn insert(&mut self, node: ProcessNode, applies_to: Option<Iri>) {
        for n in node.walk() {
            match &n.kind {
                ProcessKind::Pipe(target) if *target != node.id => {
                    self.referenced.insert(target.clone());
                }
                ProcessKind::Rule(rule) => {
                    self.claimed.insert(rule.clone());
                }
                ProcessKind::Pipeline(_) if n.id != node.id => {
                    self.referenced.insert(n.id.clone());
                }
                _ => {}
            }
        }
        if let Some(concept) = applies_to {
            self.elementary.insert(concept, node.id.clone());
        }
        self.processes.insert(node.id.clone(), node);
    }

    pub fn elementary_process(&self, concept: &Iri) -> Option<&Iri> {
        self.elementary.get(concept)
    }

    pub fn is_elementary(&self, process: &Iri) -> bool {
        self.elementary.values().any(|p| p == process)
    }

    pub fn is_claimed(&self, rule: &Iri) -> bool {
        self.claimed.contains(rule)
    }

    /// Pipelines that are neither elementary nor invoked by another process:
    /// the entry points of a check.
    pub fn roots(&self) -> Vec<&Iri> {
        self.processes
            .keys()
            .filter(|id| !self.referenced.contains(*id) && !self.is_elementary(id))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EventKind {
    ProcessEnter,
    ProcessExit,
    QuerySuccess,
    QueryFailure,
    ViolationDetected,
    Load,
    Update,
    RuleEvaluated,
}

impl EventKind {
    pub fn name(self) -> &'static str {
        match self {
            EventKind::ProcessEnter => "process-enter",
            EventKind::ProcessExit => "process-exit",
            EventKind::QuerySuccess => "query-success",
            EventKind::QueryFailure => "query-failure",
            EventKind::ViolationDetected => "violation-detected",
            EventKind::Load => "load",
            EventKind::Update => "update",
            EventKind::RuleEvaluated => "rule-evaluated",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExecutionEvent {
    pub seq: u64,
    pub kind: EventKind,
    /// The process, rule or query the event is about.
    pub subject: Iri,
    pub component: Option<Iri>,
    pub detail: String,
}

impl fmt::Display for ExecutionEvent {
    /// One tab-separated line; the canonical form hashed into trace digests.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}\t{}\t{}\t{}\t{}",
            self.seq,
            self.kind.name(),
            self.subject,
            self.component.as_ref().map_or("-", Iri::as_str),
            self.detail.replace(['\t', '\n'], " ")
        )
    }
}
