use std::collections::BTreeSet;

use super::{PipelineError, ProcessKind, ProcessNode, ProcessRegistry};
use crate::kgstore::Iri;
use crate::ontology::Ontology;
use crate::vocab;

fn composed_iri(concept: &Iri) -> Iri {
    Iri::new(vocab::proc(&format!("composed_{}", concept.local_name()))).expect("valid")
}

fn pipe(owner: &Iri, n: usize, target: &Iri) -> ProcessNode {
    ProcessNode {
        id: Iri::new(format!("{owner}_s{n}")).expect("valid"),
        kind: ProcessKind::Pipe(target.clone()),
    }
}

/// Builds the complex process of `concept`: a pipe to its own elementary
/// process when one is registered, then one pipe per component concept of
/// its definition, in definition order.
///
/// A component with a definition but no registered process gets a composed
/// process of its own. Composed processes are registered under
/// `proc:composed_<Name>`; nested components are reached through their pipes
/// when the process runs.
pub fn compose_complex(registry: &mut ProcessRegistry, onto: &Ontology, concept: &Iri) -> Result<ProcessNode, PipelineError> {
    let mut pending = BTreeSet::new();
    let node = compose(registry, onto, concept, &mut pending)?;
    registry.insert(node.clone(), None);
    Ok(node)
}

fn compose(
    registry: &mut ProcessRegistry,
    onto: &Ontology,
    concept: &Iri,
    pending: &mut BTreeSet<Iri>,
) -> Result<ProcessNode, PipelineError> {
    let id = composed_iri(concept);
    pending.insert(concept.clone());
    let mut targets: Vec<Iri> = registry.elementary_process(concept).cloned().into_iter().collect();
    let mut gaps = Vec::new();
    let components: Vec<Iri> = onto
        .definition(concept)
        .map(|d| d.component_concepts().into_iter().cloned().collect())
        .unwrap_or_default();
    for component in &components {
        if let Some(p) = registry.elementary_process(component) {
            targets.push(p.clone());
        } else if onto.definition(component).is_some() {
            if !pending.contains(component) {
                let nested = compose(registry, onto, component, pending)?;
                registry.insert(nested, None);
            }
            targets.push(composed_iri(component));
        } else {
            gaps.push(component.clone());
        }
    }
    if !gaps.is_empty() {
        return Err(PipelineError::Uncomposable(concept.clone(), gaps));
    }
    if targets.is_empty() {
        return Err(PipelineError::Uncomposable(concept.clone(), vec![concept.clone()]));
    }
    let body = targets.iter().enumerate().map(|(i, t)| pipe(&id, i + 1, t)).collect();
    Ok(ProcessNode { id, kind: ProcessKind::Pipeline(body) })
}
