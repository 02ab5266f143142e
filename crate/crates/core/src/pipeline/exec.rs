use std::collections::{BTreeMap, BTreeSet};

use log::debug;

use super::{EventKind, ExecutionEvent, PipelineError, ProcessKind, ProcessNode, ProcessRegistry, QuerySource, RuleSelection};
use crate::kgstore::{close_in_place, Graph, Iri};
use crate::query::{eval_ask, eval_select, parse_query, solutions, Query, QueryForm};
use crate::rulebase::RuleSet;

pub const DEFAULT_MAX_DEPTH: usize = 16;

/// Receives every event of a run, synchronously and in sequence order.
pub trait EventListener {
    fn on_event(&mut self, event: &ExecutionEvent);
}

/// Collects `(rule, component)` pairs from violation events.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ViolationCollector {
    pub violations: Vec<(Iri, Option<Iri>)>,
}

impl EventListener for ViolationCollector {
    fn on_event(&mut self, event: &ExecutionEvent) {
        if event.kind == EventKind::ViolationDetected {
            self.violations.push((event.subject.clone(), event.component.clone()));
        }
    }
}

/// Working state of one run. Single-threaded: `Load` and `Update` steps
/// mutate the working graph.
pub struct ExecutionContext<'a> {
    graph: Graph,
    registry: &'a ProcessRegistry,
    rules: &'a RuleSet,
    disabled: BTreeSet<Iri>,
    resources: BTreeMap<String, Graph>,
    listeners: Vec<&'a mut dyn EventListener>,
    depth: usize,
    max_depth: usize,
    trace: Vec<ExecutionEvent>,
    started: bool,
}

impl<'a> ExecutionContext<'a> {
    pub fn new(graph: Graph, registry: &'a ProcessRegistry, rules: &'a RuleSet) -> Self {
        ExecutionContext {
            graph,
            registry,
            rules,
            disabled: BTreeSet::new(),
            resources: BTreeMap::new(),
            listeners: Vec::new(),
            depth: 0,
            max_depth: DEFAULT_MAX_DEPTH,
            trace: Vec::new(),
            started: false,
        }
    }

    pub fn with_max_depth(mut self, max_depth: usize) -> Self {
        self.max_depth = max_depth;
        self
    }

    /// Graphs that `Load` and `Update` steps refer to by resource name.
    pub fn with_resources(mut self, resources: BTreeMap<String, Graph>) -> Self {
        self.resources = resources;
        self
    }

    /// Rules that exist but are filtered out of this run; steps naming them
    /// are skipped.
    pub fn with_disabled_rules(mut self, disabled: BTreeSet<Iri>) -> Self {
        self.disabled = disabled;
        self
    }

    pub fn register_listener(&mut self, listener: &'a mut dyn EventListener) -> Result<(), PipelineError> {
        if self.started {
            return Err(PipelineError::ListenerAfterStart);
        }
        self.listeners.push(listener);
        Ok(())
    }

    pub fn trace(&self) -> &[ExecutionEvent] {
        &self.trace
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    fn emit(&mut self, kind: EventKind, subject: &Iri, component: Option<Iri>, detail: impl Into<String>) {
        let event = ExecutionEvent {
            seq: self.trace.len() as u64 + 1,
            kind,
            subject: subject.clone(),
            component,
            detail: detail.into(),
        };
        for l in self.listeners.iter_mut() {
            l.on_event(&event);
        }
        self.trace.push(event);
    }

    /// Runs `node` depth first. Violations never stop the run; structural
    /// errors do, after closing every open pipeline in the trace.
    pub fn run(&mut self, node: &ProcessNode) -> Result<(), PipelineError> {
        self.started = true;
        match &node.kind {
            ProcessKind::Pipeline(body) => self.pipeline(node, body),
            ProcessKind::Pipe(target) => {
                let target = self
                    .registry
                    .get(target)
                    .ok_or_else(|| PipelineError::UnknownProcess(target.clone()))?;
                self.run(target)
            }
            ProcessKind::Load(resource) => self.merge(node, resource, EventKind::Load),
            ProcessKind::Update(resource) => self.merge(node, resource, EventKind::Update),
            ProcessKind::Query(source) => self.query(node, source).map(|_| ()),
            ProcessKind::Rule(rule) => self.rule(rule),
            ProcessKind::RuleBase(selection) => {
                let ids: Vec<Iri> = match selection {
                    RuleSelection::Listed(ids) => ids.clone(),
                    RuleSelection::Target(target) => self
                        .rules
                        .rules
                        .iter()
                        .filter(|r| target.as_ref().is_none_or(|t| &r.applies_to == t))
                        .filter(|r| !self.registry.is_claimed(&r.id))
                        .map(|r| r.id.clone())
                        .collect(),
                };
                ids.iter().try_for_each(|id| self.rule(id))
            }
            ProcessKind::Test { condition, then, otherwise } => {
                let ProcessKind::Query(source) = &condition.kind else {
                    return Err(PipelineError::Malformed { node: node.id.clone(), message: "condition is not a query".into() });
                };
                let holds = self.query(condition, source)?;
                match if holds { then } else { otherwise } {
                    Some(branch) => self.run(branch),
                    None => Ok(()),
                }
            }
        }
    }

    fn pipeline(&mut self, node: &ProcessNode, body: &[ProcessNode]) -> Result<(), PipelineError> {
        if self.depth >= self.max_depth {
            return Err(PipelineError::DepthExceeded { process: node.id.clone(), max_depth: self.max_depth });
        }
        self.emit(EventKind::ProcessEnter, &node.id, None, format!("depth {}", self.depth + 1));
        self.depth += 1;
        let result = body.iter().try_for_each(|step| self.run(step));
        self.depth -= 1;
        let detail = match &result {
            Ok(()) => "ok".to_owned(),
            Err(e) => format!("error: {e}"),
        };
        self.emit(EventKind::ProcessExit, &node.id, None, detail);
        result
    }

    fn merge(&mut self, node: &ProcessNode, resource: &str, kind: EventKind) -> Result<(), PipelineError> {
        let payload = self
            .resources
            .get(resource)
            .ok_or_else(|| PipelineError::MissingResource(resource.to_owned()))?;
        let before = self.graph.len();
        self.graph.extend_from(payload);
        close_in_place(&mut self.graph);
        let added = self.graph.len() - before;
        self.emit(kind, &node.id, None, format!("{resource} (+{added} statements)"));
        Ok(())
    }

    fn prepared(&self, node: &ProcessNode, source: &QuerySource) -> Result<Option<Query>, PipelineError> {
        match source {
            QuerySource::Rule(id) if self.disabled.contains(id) => Ok(None),
            QuerySource::Rule(id) => Ok(Some(
                self.rules.get(id).ok_or_else(|| PipelineError::UnknownRule(id.clone()))?.violation_query.clone(),
            )),
            QuerySource::Text(text) => {
                let mut prefixes = self.rules.prefixes.clone();
                prefixes.extend(self.graph.prefixes().clone());
                parse_query(text, &prefixes)
                    .map(Some)
                    .map_err(|source| PipelineError::Query { node: node.id.clone(), source })
            }
        }
    }

    /// Evaluates a query step; the result is the `ASK` answer, or whether a
    /// `SELECT` returned rows.
    fn query(&mut self, node: &ProcessNode, source: &QuerySource) -> Result<bool, PipelineError> {
        let query = match self.prepared(node, source) {
            Ok(Some(q)) => q,
            Ok(None) => {
                debug!("{}: query of a filtered-out rule is skipped", node.id);
                return Ok(false);
            }
            Err(e) => {
                self.emit(EventKind::QueryFailure, &node.id, None, e.to_string());
                return Err(e);
            }
        };
        let outcome = match query.form {
            QueryForm::Ask => eval_ask(&self.graph, &query).map(|b| (b, b.to_string())),
            QueryForm::Select => eval_select(&self.graph, &query).map(|rows| (!rows.is_empty(), format!("{} rows", rows.len()))),
        };
        match outcome {
            Ok((holds, detail)) => {
                self.emit(EventKind::QuerySuccess, &node.id, None, detail);
                Ok(holds)
            }
            Err(source) => {
                self.emit(EventKind::QueryFailure, &node.id, None, source.to_string());
                Err(PipelineError::Query { node: node.id.clone(), source })
            }
        }
    }

    /// Evaluates a rule's violation query: one `rule-evaluated` event, then
    /// one `violation-detected` event per distinct `?x` component.
    fn rule(&mut self, id: &Iri) -> Result<(), PipelineError> {
        if self.disabled.contains(id) {
            debug!("rule {id} is filtered out");
            return Ok(());
        }
        let rule = self.rules.get(id).ok_or_else(|| PipelineError::UnknownRule(id.clone()))?;
        let components: BTreeSet<Option<Iri>> = solutions(&self.graph, &rule.violation_query)
            .into_iter()
            .map(|b| b.get("x").and_then(|t| t.as_iri()).cloned())
            .collect();
        let verdict = if components.is_empty() { "satisfied" } else { "violated" };
        self.emit(EventKind::RuleEvaluated, id, None, verdict);
        for component in components {
            self.emit(EventKind::ViolationDetected, id, component, "");
        }
        Ok(())
    }
}

/// Runs `node` in `ctx` and returns the trace. On error the partial trace
/// stays available through [`ExecutionContext::trace`].
pub fn execute(node: &ProcessNode, ctx: &mut ExecutionContext<'_>) -> Result<Vec<ExecutionEvent>, PipelineError> {
    ctx.run(node)?;
    Ok(ctx.trace().to_vec())
}
