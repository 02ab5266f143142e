//! Regulatory rules: an SBVR sentence, an `ASK` violation query (true means
//! the component violates the rule) and classification metadata by
//! documentary source, domain and theme.

mod format;
mod sbvr;
mod table;

use std::collections::BTreeMap;

use thiserror::Error;

use crate::kgstore::{builtin_prefixes, Graph, Iri, Literal, Term, Triple};
use crate::query::{CompareOp, Query, QueryError};
use crate::text::canonical_label;
use crate::vocab;

pub use format::{load_rulebase, write_rulebase};
pub use sbvr::{parse_annotated, render_sbvr, RenderMode, SbvrRule, Span, SpanKind, SpanVocabulary};
pub use table::{
    cell_rule_iri, cell_rule_name, compile_table, coverage_rule, coverage_rule_iri, Column, Situation, SlopeTable,
    TableError, Zone,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RulebaseError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("rule {0} is defined twice")]
    DuplicateRule(Iri),
    #[error("rule {rule}: {source}")]
    Query { rule: Iri, source: QueryError },
    #[error("rule {0}: the violation query must be an ASK query")]
    NotAsk(Iri),
    #[error("rule {rule}: {message}")]
    Span { rule: Iri, message: String },
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RuleMetadata {
    pub source_doc: String,
    pub domain_tag: String,
    pub theme_tag: String,
}

impl RuleMetadata {
    pub fn new(source_doc: impl Into<String>, domain_tag: impl Into<String>, theme_tag: impl Into<String>) -> Self {
        RuleMetadata {
            source_doc: source_doc.into(),
            domain_tag: domain_tag.into(),
            theme_tag: theme_tag.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rule {
    pub id: Iri,
    pub sbvr: SbvrRule,
    pub violation_query: Query,
    /// Component type whose elementary process runs this rule.
    pub applies_to: Iri,
}

impl Rule {
    pub fn metadata(&self) -> RuleMetadata {
        RuleMetadata::new(&self.sbvr.source_doc, &self.sbvr.domain_tag, &self.sbvr.theme_tag)
    }

    /// Exact-match reading of the table: recovery must equal the cell value
    /// instead of reaching it. Rewrites `>=` to `=` in the `MINUS` filters.
    pub fn strict(&self) -> Rule {
        let mut rule = self.clone();
        if let Some(minus) = rule.violation_query.body.minus.as_mut() {
            for f in &mut minus.filters {
                if f.op == CompareOp::Ge {
                    f.op = CompareOp::Eq;
                }
            }
        }
        rule
    }
}

/// Selects rules whose metadata matches every given field, compared as
/// canonical labels.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MetadataFilter {
    pub source: Option<String>,
    pub domain: Option<String>,
    pub theme: Option<String>,
}

impl MetadataFilter {
    pub fn accepts(&self, rule: &Rule) -> bool {
        let ok = |want: &Option<String>, have: &str| {
            want.as_ref().is_none_or(|w| canonical_label(w) == canonical_label(have))
        };
        ok(&self.source, &rule.sbvr.source_doc)
            && ok(&self.domain, &rule.sbvr.domain_tag)
            && ok(&self.theme, &rule.sbvr.theme_tag)
    }
}

/// A loaded rulebase.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RuleSet {
    pub rules: Vec<Rule>,
    pub prefixes: BTreeMap<String, String>,
    /// Non-fatal findings of loading, such as unknown span labels.
    pub warnings: Vec<String>,
}

impl RuleSet {
    pub fn get(&self, id: &Iri) -> Option<&Rule> {
        self.rules.iter().find(|r| &r.id == id)
    }

    pub fn filtered(&self, filter: &MetadataFilter) -> RuleSet {
        RuleSet {
            rules: self.rules.iter().filter(|r| filter.accepts(r)).cloned().collect(),
            ..self.clone()
        }
    }

    pub fn strict(&self) -> RuleSet {
        RuleSet {
            rules: self.rules.iter().map(Rule::strict).collect(),
            ..self.clone()
        }
    }
}

/// Prefixes used by generated rulebases and their queries.
pub fn rulebase_prefixes() -> BTreeMap<String, String> {
    let mut p = builtin_prefixes();
    p.insert("dt".into(), vocab::DT.into());
    p.insert("rules".into(), vocab::RULES.into());
    p.insert("sbvr".into(), vocab::SBVR.into());
    p
}

/// The justification knowledge base: per rule, `rule dt:hasSBVR node` and
/// `node dt:hasSBVRrule "sentence"`.
pub fn serialize_sbvr_base(rules: &[Rule]) -> Graph {
    let mut g = Graph::new();
    for (prefix, base) in rulebase_prefixes() {
        g.set_prefix(prefix, base);
    }
    let has_sbvr = Iri::new(vocab::DT_HAS_SBVR).expect("valid");
    let has_rule = Iri::new(vocab::DT_HAS_SBVR_RULE).expect("valid");
    for rule in rules {
        g.insert(Triple::new(rule.id.clone(), has_sbvr.clone(), Term::Iri(rule.sbvr.id.clone())));
        g.insert(Triple::new(
            rule.sbvr.id.clone(),
            has_rule.clone(),
            Term::Literal(Literal::string(rule.sbvr.text.clone())),
        ));
    }
    g
}
