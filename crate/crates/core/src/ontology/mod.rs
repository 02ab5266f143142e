//! Concept hierarchy construction: thesaurus import, redundancy removal by
//! transitive reduction, intersection merge, and classification of
//! instances against defined concepts.

mod classify;
mod merge;
mod reduce;
mod thesaurus;

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::kgstore::{Datatype, Graph, Iri, Literal, Term, Triple};
use crate::text::canonical_label;
use crate::vocab;

pub use classify::classify_instance;
pub use merge::{merge_intersection, MergeOutcome, MergeWarning};
pub use reduce::{find_cycle, reduce_edges, transitive_reduction};
pub use thesaurus::{import_thesaurus, parse_thesaurus, ThesaurusEntry};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OntologyError {
    #[error("thesaurus line {line}: {message}")]
    ThesaurusSyntax { line: usize, message: String },
    #[error("thesaurus entry with an empty term")]
    EmptyTerm,
    #[error("label {0:?} does not yield a usable concept name")]
    UnusableLabel(String),
    #[error("term {term:?} references unknown term {missing:?}")]
    DanglingReference { term: String, missing: String },
    #[error("term {0:?} references itself")]
    SelfReference(String),
    #[error("{narrower:?} is declared both narrower and broader than {broader:?}")]
    Contradictory { narrower: String, broader: String },
    #[error("labels {first:?} and {second:?} collide after canonicalization")]
    DuplicateLabel { first: String, second: String },
    #[error("subclass hierarchy has a cycle: {}", join_iris(.0))]
    Cycle(Vec<Iri>),
    #[error("merge would create a subclass cycle: {}", join_iris(.0))]
    MergeCycle(Vec<Iri>),
    #[error("malformed concept definition {node}: {reason}")]
    BadDefinition { node: String, reason: String },
}

fn join_iris(iris: &[Iri]) -> String {
    iris.iter().map(Iri::as_str).collect::<Vec<_>>().join(" -> ")
}

/// What a restriction requires of the property value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Filler {
    /// Some value typed with this concept.
    Concept(Iri),
    /// Exactly this value.
    Value(Term),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Restriction {
    pub property: Iri,
    pub filler: Filler,
}

/// A defined concept: an intersection of base concepts and property
/// restrictions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConceptDef {
    pub defined: Iri,
    pub base: Vec<Iri>,
    pub restrictions: Vec<Restriction>,
}

impl ConceptDef {
    /// Concept fillers in definition order, without repeats.
    pub fn component_concepts(&self) -> Vec<&Iri> {
        let mut seen = BTreeSet::new();
        self.restrictions
            .iter()
            .filter_map(|r| match &r.filler {
                Filler::Concept(c) => Some(c),
                Filler::Value(_) => None,
            })
            .filter(|c| seen.insert(*c))
            .collect()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Ontology {
    pub concepts: BTreeSet<Iri>,
    /// `(child, parent)` pairs.
    pub subclass_edges: BTreeSet<(Iri, Iri)>,
    pub labels: BTreeMap<Iri, String>,
    pub axioms: Vec<ConceptDef>,
    pub properties: BTreeSet<Iri>,
    /// Merged concept to the source concept it was matched with.
    pub alignments: BTreeMap<Iri, Iri>,
}

fn iri(s: &str) -> Iri {
    Iri::new(s).expect("vocabulary IRI")
}

impl Ontology {
    pub fn definition(&self, concept: &Iri) -> Option<&ConceptDef> {
        self.axioms.iter().find(|d| &d.defined == concept)
    }

    /// Label used for matching: the declared label, else the IRI local name.
    pub fn label_of<'a>(&'a self, concept: &'a Iri) -> &'a str {
        self.labels
            .get(concept)
            .map(String::as_str)
            .unwrap_or_else(|| concept.local_name())
    }

    /// Checks edge endpoints and label injectivity.
    pub fn validate(&self) -> Result<(), OntologyError> {
        for (child, parent) in &self.subclass_edges {
            for end in [child, parent] {
                if !self.concepts.contains(end) {
                    return Err(OntologyError::BadDefinition {
                        node: end.to_string(),
                        reason: "subclass edge endpoint is not a concept".into(),
                    });
                }
            }
        }
        let mut seen: BTreeMap<String, &str> = BTreeMap::new();
        for label in self.labels.values() {
            let key = canonical_label(label);
            if let Some(first) = seen.insert(key, label) {
                return Err(OntologyError::DuplicateLabel {
                    first: first.to_owned(),
                    second: label.clone(),
                });
            }
        }
        Ok(())
    }

    /// Encodes the ontology as statements. Concept definitions are reified on
    /// `<concept>_def` nodes with numbered `<concept>_def_r<n>` restriction
    /// nodes.
    pub fn to_graph(&self) -> Graph {
        let mut g = Graph::new();
        g.set_prefix("owl", vocab::OWL);
        g.set_prefix("onto", vocab::ONTO);
        let rdf_type = iri(vocab::RDF_TYPE);
        let label = iri(vocab::RDFS_LABEL);
        for c in &self.concepts {
            g.insert(Triple::new(c.clone(), rdf_type.clone(), iri(vocab::OWL_CLASS)));
            if let Some(l) = self.labels.get(c) {
                g.insert(Triple::new(c.clone(), label.clone(), Literal::string(l.clone())));
            }
        }
        for p in &self.properties {
            g.insert(Triple::new(p.clone(), rdf_type.clone(), iri(vocab::OWL_OBJECT_PROPERTY)));
            if let Some(l) = self.labels.get(p) {
                g.insert(Triple::new(p.clone(), label.clone(), Literal::string(l.clone())));
            }
        }
        for (child, parent) in &self.subclass_edges {
            g.insert(Triple::new(child.clone(), iri(vocab::RDFS_SUBCLASS_OF), parent.clone()));
        }
        for (merged, source) in &self.alignments {
            g.insert(Triple::new(merged.clone(), iri(vocab::ONTO_ALIGNED_WITH), source.clone()));
        }
        for def in &self.axioms {
            let node = iri(&format!("{}_def", def.defined));
            g.insert(Triple::new(node.clone(), rdf_type.clone(), iri(vocab::ONTO_CONCEPT_DEF)));
            g.insert(Triple::new(node.clone(), iri(vocab::ONTO_DEFINES), def.defined.clone()));
            for b in &def.base {
                g.insert(Triple::new(node.clone(), iri(vocab::ONTO_BASE), b.clone()));
            }
            for (i, r) in def.restrictions.iter().enumerate() {
                let rnode = iri(&format!("{}_def_r{}", def.defined, i + 1));
                g.insert(Triple::new(node.clone(), iri(vocab::ONTO_RESTRICTION), rnode.clone()));
                g.insert(Triple::new(rnode.clone(), iri(vocab::ONTO_INDEX), Literal::integer(i as i64 + 1)));
                g.insert(Triple::new(rnode.clone(), iri(vocab::ONTO_RESTRICTS_PROPERTY), r.property.clone()));
                match &r.filler {
                    Filler::Concept(c) => {
                        g.insert(Triple::new(rnode, iri(vocab::ONTO_SOME_VALUES_FROM), c.clone()))
                    }
                    Filler::Value(v) => {
                        g.insert(Triple::new(rnode, iri(vocab::ONTO_HAS_VALUE), v.clone()))
                    }
                };
            }
        }
        g
    }

    /// Reads an ontology back from statements. Concepts are `owl:Class`
    /// subjects plus every `rdfs:subClassOf` endpoint and defined concept.
    pub fn from_graph(graph: &Graph) -> Result<Self, OntologyError> {
        let mut onto = Ontology::default();
        let owl_class = Term::Iri(iri(vocab::OWL_CLASS));
        for c in graph.subjects(vocab::RDF_TYPE, &owl_class) {
            onto.concepts.insert(c.clone());
        }
        let owl_prop = Term::Iri(iri(vocab::OWL_OBJECT_PROPERTY));
        for p in graph.subjects(vocab::RDF_TYPE, &owl_prop) {
            onto.properties.insert(p.clone());
        }
        for t in graph.with_predicate(vocab::RDFS_SUBCLASS_OF) {
            if let Term::Iri(parent) = &t.object {
                if parent != &t.subject {
                    onto.concepts.insert(t.subject.clone());
                    onto.concepts.insert(parent.clone());
                    onto.subclass_edges.insert((t.subject.clone(), parent.clone()));
                }
            }
        }
        for t in graph.with_predicate(vocab::ONTO_ALIGNED_WITH) {
            if let Term::Iri(source) = &t.object {
                onto.alignments.insert(t.subject.clone(), source.clone());
            }
        }
        let mut def_nodes: Vec<&Iri> = graph
            .subjects(vocab::RDF_TYPE, &Term::Iri(iri(vocab::ONTO_CONCEPT_DEF)))
            .into_iter()
            .collect();
        for t in graph.with_predicate(vocab::ONTO_DEFINES) {
            if !def_nodes.contains(&&t.subject) {
                def_nodes.push(&t.subject);
            }
        }
        for node in def_nodes {
            let def = read_definition(graph, node)?;
            onto.concepts.insert(def.defined.clone());
            onto.axioms.push(def);
        }
        for t in graph.with_predicate(vocab::RDFS_LABEL) {
            let is_entity = onto.concepts.contains(&t.subject) || onto.properties.contains(&t.subject);
            if let (true, Term::Literal(l)) = (is_entity, &t.object) {
                onto.labels.entry(t.subject.clone()).or_insert_with(|| l.lexical().to_owned());
            }
        }
        onto.validate()?;
        Ok(onto)
    }
}

fn read_definition(graph: &Graph, node: &Iri) -> Result<ConceptDef, OntologyError> {
    let bad = |reason: &str| OntologyError::BadDefinition {
        node: node.to_string(),
        reason: reason.to_owned(),
    };
    let defined = match graph.objects(node, vocab::ONTO_DEFINES).as_slice() {
        [Term::Iri(c)] => c.clone(),
        [] => return Err(bad("missing onto:defines")),
        _ => return Err(bad("onto:defines must name exactly one concept")),
    };
    let base = graph
        .objects(node, vocab::ONTO_BASE)
        .into_iter()
        .map(|t| t.as_iri().cloned().ok_or_else(|| bad("onto:base must be an IRI")))
        .collect::<Result<Vec<_>, _>>()?;
    let mut indexed = Vec::new();
    for r in graph.objects(node, vocab::ONTO_RESTRICTION) {
        let rnode = r.as_iri().ok_or_else(|| bad("restriction node must be an IRI"))?;
        let index = match graph.objects(rnode, vocab::ONTO_INDEX).as_slice() {
            [Term::Literal(l)] if l.datatype() == Datatype::Integer => l
                .lexical()
                .parse::<i64>()
                .map_err(|_| bad("restriction index out of range"))?,
            _ => return Err(bad("restriction needs exactly one integer onto:index")),
        };
        let property = match graph.objects(rnode, vocab::ONTO_RESTRICTS_PROPERTY).as_slice() {
            [Term::Iri(p)] => p.clone(),
            _ => return Err(bad("restriction needs exactly one onto:restrictsProperty")),
        };
        let some = graph.objects(rnode, vocab::ONTO_SOME_VALUES_FROM);
        let value = graph.objects(rnode, vocab::ONTO_HAS_VALUE);
        let filler = match (some.as_slice(), value.as_slice()) {
            ([Term::Iri(c)], []) => Filler::Concept(c.clone()),
            ([], [v]) => Filler::Value((*v).clone()),
            _ => return Err(bad("restriction needs one someValuesFrom IRI or one hasValue")),
        };
        indexed.push((index, Restriction { property, filler }));
    }
    indexed.sort_by_key(|(i, _)| *i);
    if indexed.windows(2).any(|w| w[0].0 == w[1].0) {
        return Err(bad("duplicate restriction index"));
    }
    let restrictions: Vec<_> = indexed.into_iter().map(|(_, r)| r).collect();
    if base.is_empty() && restrictions.is_empty() {
        return Err(bad("definition has neither base concepts nor restrictions"));
    }
    Ok(ConceptDef {
        defined,
        base,
        restrictions,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kgstore::{parse_graph, serialize_graph};

    fn dt(s: &str) -> Iri {
        Iri::new(vocab::dt(s)).unwrap()
    }

    fn sample() -> Ontology {
        let mut o = Ontology::default();
        for c in ["Tile", "PlatClayTile", "Clay", "Flat"] {
            o.concepts.insert(dt(c));
            o.labels.insert(dt(c), c.to_lowercase());
        }
        o.subclass_edges.insert((dt("PlatClayTile"), dt("Tile")));
        o.properties.insert(dt("hasMaterial"));
        o.labels.insert(dt("hasMaterial"), "has material".into());
        o.axioms.push(ConceptDef {
            defined: dt("PlatClayTile"),
            base: vec![dt("Tile")],
            restrictions: vec![
                Restriction { property: dt("hasMaterial"), filler: Filler::Concept(dt("Clay")) },
                Restriction { property: dt("hasAForm"), filler: Filler::Concept(dt("Flat")) },
                Restriction { property: dt("hasColour"), filler: Filler::Value(Term::Literal(Literal::string("red"))) },
            ],
        });
        o
    }

    #[test]
    fn graph_round_trip() {
        let o = sample();
        let text = serialize_graph(&o.to_graph());
        let back = Ontology::from_graph(&parse_graph(&text).unwrap()).unwrap();
        assert_eq!(back, o);
    }

    #[test]
    fn empty_definition_is_rejected() {
        let text = format!(
            "@prefix onto: <{}> .\n@prefix dt: <{}> .\ndt:X_def onto:defines dt:X .\n",
            vocab::ONTO,
            vocab::DT
        );
        let err = Ontology::from_graph(&parse_graph(&text).unwrap()).unwrap_err();
        assert!(matches!(err, OntologyError::BadDefinition { .. }));
    }

    #[test]
    fn colliding_labels_are_rejected() {
        let mut o = sample();
        o.labels.insert(dt("Flat"), "Clay".into());
        assert!(matches!(o.validate(), Err(OntologyError::DuplicateLabel { .. })));
    }
}
