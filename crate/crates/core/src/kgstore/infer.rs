use std::collections::{BTreeMap, BTreeSet, VecDeque};

use super::graph::Graph;
use super::term::{Iri, Term, Triple};
use crate::vocab;

/// Superclasses reachable from every class through `rdfs:subClassOf`,
/// excluding the class itself unless it lies on a cycle.
pub fn superclass_closure(graph: &Graph) -> BTreeMap<Iri, BTreeSet<Iri>> {
    let mut direct: BTreeMap<Iri, Vec<Iri>> = BTreeMap::new();
    for t in graph.with_predicate(vocab::RDFS_SUBCLASS_OF) {
        if let Term::Iri(parent) = &t.object {
            direct.entry(t.subject.clone()).or_default().push(parent.clone());
        }
    }
    let mut closure = BTreeMap::new();
    for start in direct.keys() {
        let mut seen = BTreeSet::new();
        let mut queue: VecDeque<&Iri> = direct[start].iter().collect();
        while let Some(next) = queue.pop_front() {
            if seen.insert(next.clone()) {
                if let Some(parents) = direct.get(next) {
                    queue.extend(parents.iter());
                }
            }
        }
        closure.insert(start.clone(), seen);
    }
    closure
}

/// Forward-chains subclass transitivity and type propagation to fixpoint.
///
/// Subclass cycles are closed over: each member of a cycle ends up a
/// subclass of every other member. Reflexive `A rdfs:subClassOf A` is never
/// materialized.
pub fn infer_closure(graph: &Graph) -> Graph {
    let mut out = graph.clone();
    close_in_place(&mut out);
    out
}

/// Same as [`infer_closure`], mutating the graph.
pub fn close_in_place(graph: &mut Graph) {
    let closure = superclass_closure(graph);
    let subclass_of = Iri::new(vocab::RDFS_SUBCLASS_OF).expect("valid IRI");
    let rdf_type = Iri::new(vocab::RDF_TYPE).expect("valid IRI");

    let mut added = Vec::new();
    for (class, supers) in &closure {
        for sup in supers {
            if sup != class {
                added.push(Triple::new(class.clone(), subclass_of.clone(), sup.clone()));
            }
        }
    }
    for t in graph.with_predicate(vocab::RDF_TYPE) {
        let Term::Iri(class) = &t.object else { continue };
        if let Some(supers) = closure.get(class) {
            for sup in supers {
                added.push(Triple::new(t.subject.clone(), rdf_type.clone(), sup.clone()));
            }
        }
    }
    for t in added {
        graph.insert(t);
    }
}
