use super::{PipelineError, ProcessKind, ProcessNode, ProcessRegistry, QuerySource, RuleSelection};
use crate::kgstore::{Datatype, Graph, Iri, Term};
use crate::vocab;

const KINDS: [&str; 8] = ["Pipeline", "Pipe", "Load", "Query", "Update", "RuleBase", "Rule", "Test"];

struct Reader<'g> {
    graph: &'g Graph,
}

fn malformed(node: &Iri, message: impl Into<String>) -> PipelineError {
    PipelineError::Malformed { node: node.clone(), message: message.into() }
}

impl<'g> Reader<'g> {
    fn objects(&self, node: &Iri, property: &str) -> Vec<&'g Term> {
        self.graph.objects(node, &vocab::proc(property))
    }

    fn one(&self, node: &Iri, property: &str) -> Result<Option<&'g Term>, PipelineError> {
        match self.objects(node, property)[..] {
            [] => Ok(None),
            [t] => Ok(Some(t)),
            _ => Err(malformed(node, format!("more than one proc:{property}"))),
        }
    }

    fn one_iri(&self, node: &Iri, property: &str) -> Result<Option<&'g Iri>, PipelineError> {
        match self.one(node, property)? {
            None => Ok(None),
            Some(Term::Iri(iri)) => Ok(Some(iri)),
            Some(_) => Err(malformed(node, format!("proc:{property} must be an IRI"))),
        }
    }

    fn one_text(&self, node: &Iri, property: &str) -> Result<Option<&'g str>, PipelineError> {
        match self.one(node, property)? {
            None => Ok(None),
            Some(Term::Literal(l)) => Ok(Some(l.lexical())),
            Some(_) => Err(malformed(node, format!("proc:{property} must be a literal"))),
        }
    }

    fn kind_of(&self, node: &Iri) -> Result<Option<&'static str>, PipelineError> {
        let types = self.graph.objects(node, vocab::RDF_TYPE);
        let kinds: Vec<&'static str> = KINDS
            .iter()
            .copied()
            .filter(|k| types.iter().any(|t| t.as_iri().is_some_and(|i| i.as_str() == vocab::proc(k))))
            .collect();
        match kinds[..] {
            [] => Ok(None),
            [k] => Ok(Some(k)),
            _ => Err(malformed(node, format!("typed as several process kinds: {}", kinds.join(", ")))),
        }
    }

    fn node_ref(&self, from: &Iri, property: &'static str, target: &Iri, stack: &mut Vec<Iri>) -> Result<ProcessNode, PipelineError> {
        if self.kind_of(target)?.is_none() {
            return Err(PipelineError::Dangling { node: from.clone(), property, target: target.to_string() });
        }
        self.node(target, stack)
    }

    fn node(&self, id: &Iri, stack: &mut Vec<Iri>) -> Result<ProcessNode, PipelineError> {
        if stack.contains(id) {
            return Err(malformed(id, "contains itself; invoke it through a proc:Pipe instead"));
        }
        stack.push(id.clone());
        let kind = self.kind(id, stack);
        stack.pop();
        Ok(ProcessNode { id: id.clone(), kind: kind? })
    }

    fn kind(&self, id: &Iri, stack: &mut Vec<Iri>) -> Result<ProcessKind, PipelineError> {
        let require_text = |property: &str| {
            self.one_text(id, property)?
                .map(str::to_owned)
                .ok_or_else(|| malformed(id, format!("missing proc:{property}")))
        };
        Ok(match self.kind_of(id)?.ok_or_else(|| malformed(id, "not typed as a process"))? {
            "Pipeline" => ProcessKind::Pipeline(self.body(id, stack)?),
            "Pipe" => ProcessKind::Pipe(
                self.one_iri(id, "target")?
                    .cloned()
                    .ok_or_else(|| malformed(id, "missing proc:target"))?,
            ),
            "Load" => ProcessKind::Load(require_text("resource")?),
            "Update" => ProcessKind::Update(require_text("resource")?),
            "Query" => match (self.one_text(id, "queryText")?, self.one_iri(id, "ruleRef")?) {
                (Some(text), None) => ProcessKind::Query(QuerySource::Text(text.to_owned())),
                (None, Some(rule)) => ProcessKind::Query(QuerySource::Rule(rule.clone())),
                _ => return Err(malformed(id, "needs exactly one of proc:queryText and proc:ruleRef")),
            },
            "RuleBase" => {
                let listed = self
                    .objects(id, "ruleRef")
                    .into_iter()
                    .map(|t| t.as_iri().cloned().ok_or_else(|| malformed(id, "proc:ruleRef must be an IRI")))
                    .collect::<Result<Vec<_>, _>>()?;
                if listed.is_empty() {
                    ProcessKind::RuleBase(RuleSelection::Target(self.one_iri(id, "target")?.cloned()))
                } else {
                    ProcessKind::RuleBase(RuleSelection::Listed(listed))
                }
            }
            "Rule" => ProcessKind::Rule(
                self.one_iri(id, "ruleRef")?
                    .cloned()
                    .ok_or_else(|| malformed(id, "missing proc:ruleRef"))?,
            ),
            "Test" => {
                let cond = self.one_iri(id, "if")?.ok_or_else(|| PipelineError::TestWithoutIf(id.clone()))?;
                let condition = self.node_ref(id, "proc:if", cond, stack)?;
                if !matches!(condition.kind, ProcessKind::Query(_)) {
                    return Err(malformed(id, "proc:if must name a proc:Query"));
                }
                let mut branch = |property: &'static str, name: &str| -> Result<Option<Box<ProcessNode>>, PipelineError> {
                    match self.one_iri(id, name)? {
                        Some(target) => Ok(Some(Box::new(self.node_ref(id, property, target, stack)?))),
                        None => Ok(None),
                    }
                };
                let then = branch("proc:then", "then")?;
                let otherwise = branch("proc:else", "else")?;
                if then.is_none() && otherwise.is_none() {
                    return Err(malformed(id, "test has neither proc:then nor proc:else"));
                }
                ProcessKind::Test { condition: Box::new(condition), then, otherwise }
            }
            other => unreachable!("unhandled kind {other}"),
        })
    }

    fn body(&self, pipeline: &Iri, stack: &mut Vec<Iri>) -> Result<Vec<ProcessNode>, PipelineError> {
        let mut steps: Vec<(i64, &Iri)> = Vec::new();
        for step in self.objects(pipeline, "body") {
            let step = step.as_iri().ok_or_else(|| malformed(pipeline, "proc:body must name step nodes"))?;
            let index = match self.one(step, "index")? {
                Some(Term::Literal(l)) if l.datatype() == Datatype::Integer => l
                    .lexical()
                    .parse::<i64>()
                    .map_err(|_| malformed(step, "proc:index out of range"))?,
                Some(_) => return Err(malformed(step, "proc:index must be an integer")),
                None => return Err(PipelineError::MissingIndex { pipeline: pipeline.clone(), step: step.clone() }),
            };
            if steps.iter().any(|(i, _)| *i == index) {
                return Err(PipelineError::DuplicateIndex { pipeline: pipeline.clone(), index });
            }
            steps.push((index, step));
        }
        if steps.is_empty() {
            return Err(malformed(pipeline, "pipeline body is empty"));
        }
        steps.sort_by_key(|(i, _)| *i);
        steps
            .into_iter()
            .map(|(_, step)| {
                let target = self.one_iri(step, "step")?.ok_or_else(|| malformed(step, "missing proc:step"))?;
                self.node_ref(step, "proc:step", target, stack)
            })
            .collect()
    }
}

/// Reads every `proc:Pipeline` in the graph. A pipeline with
/// `proc:appliesTo <concept>` is registered as that concept's elementary
/// process.
pub fn parse_pipeline(graph: &Graph) -> Result<ProcessRegistry, PipelineError> {
    let reader = Reader { graph };
    let pipeline_class = Term::Iri(Iri::new(vocab::proc("Pipeline")).expect("valid"));
    let mut registry = ProcessRegistry::default();
    for id in graph.subjects(vocab::RDF_TYPE, &pipeline_class) {
        let node = reader.node(id, &mut Vec::new())?;
        let applies_to = reader.one_iri(id, "appliesTo")?.cloned();
        if let Some(concept) = &applies_to {
            if let Some(existing) = registry.elementary_process(concept) {
                return Err(malformed(id, format!("{concept} already has elementary process {existing}")));
            }
        }
        registry.insert(node, applies_to);
    }
    for root in registry.iter() {
        for n in root.walk() {
            if let ProcessKind::Pipe(target) = &n.kind {
                if registry.get(target).is_none() {
                    return Err(PipelineError::Dangling { node: n.id.clone(), property: "proc:target", target: target.to_string() });
                }
            }
        }
    }
    Ok(registry)
}
