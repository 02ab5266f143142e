use std::collections::{BTreeMap, BTreeSet};

use super::reduce::{find_cycle, reduce_edges};
use super::{Ontology, OntologyError};
use crate::kgstore::Iri;
use crate::text::canonical_label;

/// Non-fatal findings of a merge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MergeWarning {
    /// Labels matched after canonicalization but differ as written.
    NameConflict { concept: Iri, source: Iri, label: String, source_label: String },
    /// Two source concepts canonicalize to the same technical-document label;
    /// only the first is aligned.
    AmbiguousMatch { concept: Iri, aligned: Iri, ignored: Iri },
    /// An edge of the union removed by the reduction pass.
    RedundantEdge { child: Iri, parent: Iri },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MergeOutcome {
    pub ontology: Ontology,
    pub warnings: Vec<MergeWarning>,
}

/// Intersection merge of a thesaurus-derived ontology into the technical
/// document ontology.
///
/// The result keeps every `dt` concept (with its IRI, labels and axioms).
/// A `reef` concept survives only through a `dt` concept with the same
/// canonical label, and is recorded as that concept's alignment. `reef`
/// edges whose endpoints both survive are rewritten onto the `dt` IRIs, and
/// the edge union is transitively reduced.
pub fn merge_intersection(reef: &Ontology, dt: &Ontology) -> Result<MergeOutcome, OntologyError> {
    let mut warnings = Vec::new();
    let dt_by_label: BTreeMap<String, &Iri> = dt
        .concepts
        .iter()
        .map(|c| (canonical_label(dt.label_of(c)), c))
        .collect();

    let mut mapped: BTreeMap<&Iri, &Iri> = BTreeMap::new();
    let mut claimed: BTreeMap<&Iri, &Iri> = BTreeMap::new();
    for r in &reef.concepts {
        let Some(&d) = dt_by_label.get(&canonical_label(reef.label_of(r))) else {
            continue;
        };
        if let Some(&first) = claimed.get(d) {
            warnings.push(MergeWarning::AmbiguousMatch {
                concept: d.clone(),
                aligned: first.clone(),
                ignored: r.clone(),
            });
            continue;
        }
        claimed.insert(d, r);
        mapped.insert(r, d);
        if reef.label_of(r) != dt.label_of(d) {
            warnings.push(MergeWarning::NameConflict {
                concept: d.clone(),
                source: r.clone(),
                label: dt.label_of(d).to_owned(),
                source_label: reef.label_of(r).to_owned(),
            });
        }
    }

    let mut edges: BTreeSet<(Iri, Iri)> = dt.subclass_edges.clone();
    for (c, p) in &reef.subclass_edges {
        if let (Some(&c), Some(&p)) = (mapped.get(c), mapped.get(p)) {
            if c != p {
                edges.insert((c.clone(), p.clone()));
            }
        }
    }
    if let Some(cycle) = find_cycle(&edges) {
        return Err(OntologyError::MergeCycle(cycle));
    }
    let reduced = reduce_edges(&edges).map_err(OntologyError::MergeCycle)?;
    for (child, parent) in edges.difference(&reduced) {
        warnings.push(MergeWarning::RedundantEdge { child: child.clone(), parent: parent.clone() });
    }

    let mut alignments = dt.alignments.clone();
    for (r, d) in &mapped {
        if r != d {
            alignments.insert((*d).clone(), (*r).clone());
        }
    }
    Ok(MergeOutcome {
        ontology: Ontology {
            concepts: dt.concepts.clone(),
            subclass_edges: reduced,
            labels: dt.labels.clone(),
            axioms: dt.axioms.clone(),
            properties: dt.properties.clone(),
            alignments,
        },
        warnings,
    })
}
