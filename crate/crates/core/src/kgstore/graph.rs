use std::collections::{BTreeMap, HashMap};

use indexmap::IndexSet;

use super::term::{Iri, Term, Triple};
use crate::vocab;

/// Variable name (without the leading `?`) to bound term.
pub type Binding = BTreeMap<String, Term>;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PatternTerm {
    Var(String),
    Term(Term),
}

impl PatternTerm {
    pub fn var(name: &str) -> Self {
        PatternTerm::Var(name.trim_start_matches('?').to_owned())
    }

    pub fn as_var(&self) -> Option<&str> {
        match self {
            PatternTerm::Var(v) => Some(v),
            PatternTerm::Term(_) => None,
        }
    }

    fn resolve<'a>(&'a self, binding: &'a Binding) -> Option<&'a Term> {
        match self {
            PatternTerm::Var(v) => binding.get(v),
            PatternTerm::Term(t) => Some(t),
        }
    }
}

impl From<Term> for PatternTerm {
    fn from(t: Term) -> Self {
        PatternTerm::Term(t)
    }
}

impl From<Iri> for PatternTerm {
    fn from(iri: Iri) -> Self {
        PatternTerm::Term(Term::Iri(iri))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TriplePattern {
    pub subject: PatternTerm,
    pub predicate: PatternTerm,
    pub object: PatternTerm,
}

impl TriplePattern {
    pub fn new(
        subject: impl Into<PatternTerm>,
        predicate: impl Into<PatternTerm>,
        object: impl Into<PatternTerm>,
    ) -> Self {
        TriplePattern {
            subject: subject.into(),
            predicate: predicate.into(),
            object: object.into(),
        }
    }

    pub fn variables(&self) -> impl Iterator<Item = &str> {
        [&self.subject, &self.predicate, &self.object]
            .into_iter()
            .filter_map(PatternTerm::as_var)
    }
}

/// Default prefix table: the built-in `rdf:` and `rdfs:` prefixes.
pub fn builtin_prefixes() -> BTreeMap<String, String> {
    BTreeMap::from([
        ("rdf".to_owned(), vocab::RDF.to_owned()),
        ("rdfs".to_owned(), vocab::RDFS.to_owned()),
    ])
}

/// An indexed set of statements.
///
/// Statements keep their ingest order, which makes every query result order
/// reproducible for a given load sequence.
#[derive(Debug, Clone)]
pub struct Graph {
    statements: IndexSet<Triple>,
    prefixes: BTreeMap<String, String>,
    by_subject: HashMap<Iri, Vec<usize>>,
    by_predicate: HashMap<Iri, Vec<usize>>,
    by_object: HashMap<Term, Vec<usize>>,
    by_subject_predicate: HashMap<(Iri, Iri), Vec<usize>>,
    by_predicate_object: HashMap<(Iri, Term), Vec<usize>>,
}

impl Default for Graph {
    fn default() -> Self {
        Graph::new()
    }
}

impl PartialEq for Graph {
    /// Graphs are equal when their statement sets are equal; order and
    /// prefixes are presentation details.
    fn eq(&self, other: &Self) -> bool {
        self.len() == other.len() && self.statements.iter().all(|t| other.contains(t))
    }
}

impl Eq for Graph {}

impl Extend<Triple> for Graph {
    fn extend<I: IntoIterator<Item = Triple>>(&mut self, iter: I) {
        for t in iter {
            self.insert(t);
        }
    }
}

impl FromIterator<Triple> for Graph {
    fn from_iter<I: IntoIterator<Item = Triple>>(iter: I) -> Self {
        let mut g = Graph::new();
        g.extend(iter);
        g
    }
}

impl Graph {
    pub fn new() -> Self {
        Graph {
            statements: IndexSet::new(),
            prefixes: builtin_prefixes(),
            by_subject: HashMap::new(),
            by_predicate: HashMap::new(),
            by_object: HashMap::new(),
            by_subject_predicate: HashMap::new(),
            by_predicate_object: HashMap::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.statements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.statements.is_empty()
    }

    pub fn contains(&self, triple: &Triple) -> bool {
        self.statements.contains(triple)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Triple> {
        self.statements.iter()
    }

    pub fn prefixes(&self) -> &BTreeMap<String, String> {
        &self.prefixes
    }

    pub fn set_prefix(&mut self, prefix: impl Into<String>, base: impl Into<String>) {
        self.prefixes.insert(prefix.into(), base.into());
    }

    /// Inserts a statement; returns `true` if it was not already present.
    pub fn insert(&mut self, triple: Triple) -> bool {
        if self.statements.contains(&triple) {
            return false;
        }
        let idx = self.statements.len();
        self.by_subject.entry(triple.subject.clone()).or_default().push(idx);
        self.by_predicate.entry(triple.predicate.clone()).or_default().push(idx);
        self.by_object.entry(triple.object.clone()).or_default().push(idx);
        self.by_subject_predicate
            .entry((triple.subject.clone(), triple.predicate.clone()))
            .or_default()
            .push(idx);
        self.by_predicate_object
            .entry((triple.predicate.clone(), triple.object.clone()))
            .or_default()
            .push(idx);
        self.statements.insert(triple);
        true
    }

    /// Adds every statement and prefix of `other`. Existing prefixes win.
    pub fn extend_from(&mut self, other: &Graph) {
        for (p, base) in &other.prefixes {
            self.prefixes.entry(p.clone()).or_insert_with(|| base.clone());
        }
        for t in other.iter() {
            self.insert(t.clone());
        }
    }

    pub fn objects<'a>(&'a self, subject: &Iri, predicate: &str) -> Vec<&'a Term> {
        let Ok(predicate) = Iri::new(predicate) else {
            return Vec::new();
        };
        self.by_subject_predicate
            .get(&(subject.clone(), predicate))
            .map(|ids| ids.iter().map(|&i| &self.statements[i].object).collect())
            .unwrap_or_default()
    }

    pub fn subjects<'a>(&'a self, predicate: &str, object: &Term) -> Vec<&'a Iri> {
        let Ok(predicate) = Iri::new(predicate) else {
            return Vec::new();
        };
        self.by_predicate_object
            .get(&(predicate, object.clone()))
            .map(|ids| ids.iter().map(|&i| &self.statements[i].subject).collect())
            .unwrap_or_default()
    }

    pub fn with_predicate<'a>(&'a self, predicate: &str) -> Vec<&'a Triple> {
        let Ok(predicate) = Iri::new(predicate) else {
            return Vec::new();
        };
        self.by_predicate
            .get(&predicate)
            .map(|ids| ids.iter().map(|&i| &self.statements[i]).collect())
            .unwrap_or_default()
    }

    fn candidates(&self, pattern: &TriplePattern, binding: &Binding) -> Candidates<'_> {
        let s = pattern.subject.resolve(binding);
        let p = pattern.predicate.resolve(binding);
        let o = pattern.object.resolve(binding);
        // A literal in subject or predicate position can never match.
        let s = match s {
            Some(Term::Iri(iri)) => Some(iri),
            Some(Term::Literal(_)) => return Candidates::None,
            None => None,
        };
        let p = match p {
            Some(Term::Iri(iri)) => Some(iri),
            Some(Term::Literal(_)) => return Candidates::None,
            None => None,
        };
        let ids = match (s, p, o) {
            (Some(s), Some(p), _) => self.by_subject_predicate.get(&(s.clone(), p.clone())),
            (None, Some(p), Some(o)) => self.by_predicate_object.get(&(p.clone(), o.clone())),
            (Some(s), None, _) => self.by_subject.get(s),
            (None, None, Some(o)) => self.by_object.get(o),
            (None, Some(p), None) => self.by_predicate.get(p),
            (None, None, None) => return Candidates::All,
        };
        match ids {
            Some(ids) => Candidates::Some(ids),
            None => Candidates::None,
        }
    }

    /// Extends `binding` with every way `pattern` matches a statement.
    fn match_one(&self, pattern: &TriplePattern, binding: &Binding, out: &mut Vec<Binding>) {
        let mut try_triple = |t: &Triple| {
            let mut extended = binding.clone();
            let positions = [
                (&pattern.subject, Term::Iri(t.subject.clone())),
                (&pattern.predicate, Term::Iri(t.predicate.clone())),
                (&pattern.object, t.object.clone()),
            ];
            for (pt, value) in positions {
                match pt {
                    PatternTerm::Term(term) => {
                        if *term != value {
                            return;
                        }
                    }
                    PatternTerm::Var(v) => match extended.get(v) {
                        Some(bound) if *bound != value => return,
                        Some(_) => {}
                        None => {
                            extended.insert(v.clone(), value);
                        }
                    },
                }
            }
            out.push(extended);
        };
        match self.candidates(pattern, binding) {
            Candidates::None => {}
            Candidates::All => self.statements.iter().for_each(&mut try_triple),
            Candidates::Some(ids) => ids.iter().for_each(|&i| try_triple(&self.statements[i])),
        }
    }

    /// Every binding under which all `patterns` hold, joined left to right
    /// starting from `seed`.
    pub fn match_from(&self, patterns: &[TriplePattern], seed: &Binding) -> Vec<Binding> {
        let mut current = vec![seed.clone()];
        for pattern in patterns {
            let mut next = Vec::new();
            for binding in &current {
                self.match_one(pattern, binding, &mut next);
            }
            if next.is_empty() {
                return next;
            }
            current = next;
        }
        current
    }

    /// Basic graph pattern matching with join semantics across shared
    /// variables.
    pub fn match_pattern(&self, patterns: &[TriplePattern]) -> Vec<Binding> {
        self.match_from(patterns, &Binding::new())
    }
}

enum Candidates<'a> {
    None,
    All,
    Some(&'a Vec<usize>),
}
