use std::collections::{BTreeMap, BTreeSet};

use super::{Ontology, OntologyError};
use crate::kgstore::Iri;
use crate::text::{camel_case, canonical_label};

/// One thesaurus term with its broader (`BT`) and narrower (`NT`) links.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ThesaurusEntry {
    pub term: String,
    pub broader: Vec<String>,
    pub narrower: Vec<String>,
}

impl ThesaurusEntry {
    pub fn new(term: &str) -> Self {
        ThesaurusEntry {
            term: term.to_owned(),
            ..Default::default()
        }
    }
}

/// Parses the `.thes` format:
///
/// ```text
/// TERM étanchéité
///   BT calfeutrage
///   NT joint d'étanchéité
/// ```
pub fn parse_thesaurus(text: &str) -> Result<Vec<ThesaurusEntry>, OntologyError> {
    let mut entries: Vec<ThesaurusEntry> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let err = |message: &str| OntologyError::ThesaurusSyntax {
            line,
            message: message.to_owned(),
        };
        let (keyword, rest) = trimmed.split_once(char::is_whitespace).unwrap_or((trimmed, ""));
        let value = rest.trim().to_owned();
        match keyword {
            "TERM" => {
                if raw.starts_with(char::is_whitespace) {
                    return Err(err("TERM must not be indented"));
                }
                entries.push(ThesaurusEntry::new(&value));
            }
            "BT" | "NT" => {
                if !raw.starts_with(char::is_whitespace) {
                    return Err(err("BT/NT lines must be indented"));
                }
                let entry = entries.last_mut().ok_or_else(|| err("BT/NT before any TERM"))?;
                if value.is_empty() {
                    return Err(err("empty related term"));
                }
                if keyword == "BT" {
                    entry.broader.push(value);
                } else {
                    entry.narrower.push(value);
                }
            }
            other => return Err(err(&format!("unknown keyword `{other}`"))),
        }
    }
    Ok(entries)
}

/// Lifts thesaurus entries into a concept hierarchy: one concept per entry,
/// IRIs minted as CamelCase of the label under `base_iri`, `NT` links
/// becoming `narrower ⊑ term` and `BT` links `term ⊑ broader`.
pub fn import_thesaurus(entries: &[ThesaurusEntry], base_iri: &str) -> Result<Ontology, OntologyError> {
    let mut onto = Ontology::default();
    let mut by_label: BTreeMap<String, (Iri, &str)> = BTreeMap::new();
    for entry in entries {
        let key = canonical_label(&entry.term);
        if key.is_empty() {
            return Err(if entry.term.trim().is_empty() {
                OntologyError::EmptyTerm
            } else {
                OntologyError::UnusableLabel(entry.term.clone())
            });
        }
        let concept = Iri::new(format!("{base_iri}{}", camel_case(&entry.term)))
            .map_err(|_| OntologyError::UnusableLabel(entry.term.clone()))?;
        if let Some((_, first)) = by_label.get(&key) {
            return Err(OntologyError::DuplicateLabel {
                first: (*first).to_owned(),
                second: entry.term.clone(),
            });
        }
        onto.concepts.insert(concept.clone());
        onto.labels.insert(concept.clone(), entry.term.clone());
        by_label.insert(key, (concept, &entry.term));
    }

    let lookup = |term: &str, related: &str| -> Result<Iri, OntologyError> {
        by_label
            .get(&canonical_label(related))
            .map(|(iri, _)| iri.clone())
            .ok_or_else(|| OntologyError::DanglingReference {
                term: term.to_owned(),
                missing: related.to_owned(),
            })
    };

    let mut edges = BTreeSet::new();
    for entry in entries {
        let own = lookup(&entry.term, &entry.term)?;
        for n in &entry.narrower {
            let child = lookup(&entry.term, n)?;
            if child == own {
                return Err(OntologyError::SelfReference(entry.term.clone()));
            }
            edges.insert((child, own.clone()));
        }
        for b in &entry.broader {
            let parent = lookup(&entry.term, b)?;
            if parent == own {
                return Err(OntologyError::SelfReference(entry.term.clone()));
            }
            edges.insert((own.clone(), parent));
        }
    }
    for (child, parent) in &edges {
        if edges.contains(&(parent.clone(), child.clone())) {
            return Err(OntologyError::Contradictory {
                narrower: onto.labels[child].clone(),
                broader: onto.labels[parent].clone(),
            });
        }
    }
    onto.subclass_edges = edges;
    Ok(onto)
}
