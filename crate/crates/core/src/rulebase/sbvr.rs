use std::collections::BTreeSet;

use super::RulebaseError;
use crate::kgstore::Iri;
use crate::ontology::Ontology;
use crate::text::{canonical_label, property_key, split_camel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SpanKind {
    Concept,
    Property,
    Literal,
    Noun,
}

impl SpanKind {
    pub fn marker(self) -> char {
        match self {
            SpanKind::Concept => 'C',
            SpanKind::Property => 'P',
            SpanKind::Literal => 'L',
            SpanKind::Noun => 'N',
        }
    }

    pub fn from_marker(c: char) -> Option<Self> {
        Some(match c {
            'C' => SpanKind::Concept,
            'P' => SpanKind::Property,
            'L' => SpanKind::Literal,
            'N' => SpanKind::Noun,
            _ => return None,
        })
    }
}

/// A typed byte range of the plain sentence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Span {
    pub start: usize,
    pub end: usize,
    pub kind: SpanKind,
}

/// A controlled-language rule sentence with its vocabulary markup and
/// classification metadata.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SbvrRule {
    pub id: Iri,
    pub text: String,
    pub spans: Vec<Span>,
    pub source_doc: String,
    pub domain_tag: String,
    pub theme_tag: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RenderMode {
    Plain,
    Annotated,
}

impl SbvrRule {
    /// Builds a rule from an annotated sentence such as
    /// `If a [C:tile] [P:has slope] ...`.
    pub fn from_annotated(id: Iri, annotated: &str) -> Result<Self, RulebaseError> {
        let (text, spans) = parse_annotated(annotated).map_err(|message| RulebaseError::Span {
            rule: id.clone(),
            message,
        })?;
        Ok(SbvrRule {
            id,
            text,
            spans,
            source_doc: String::new(),
            domain_tag: String::new(),
            theme_tag: String::new(),
        })
    }

    /// Checks that spans are sorted, disjoint and on character boundaries.
    pub fn validate(&self) -> Result<(), RulebaseError> {
        let bad = |message: String| RulebaseError::Span { rule: self.id.clone(), message };
        let mut prev_end = 0;
        for span in &self.spans {
            if span.start >= span.end || span.end > self.text.len() {
                return Err(bad(format!("span {}..{} out of bounds", span.start, span.end)));
            }
            if !self.text.is_char_boundary(span.start) || !self.text.is_char_boundary(span.end) {
                return Err(bad(format!("span {}..{} splits a character", span.start, span.end)));
            }
            if span.start < prev_end {
                return Err(bad(format!("span {}..{} overlaps its predecessor", span.start, span.end)));
            }
            prev_end = span.end;
        }
        Ok(())
    }

    pub fn span_text(&self, span: &Span) -> &str {
        &self.text[span.start..span.end]
    }
}

/// Splits marker syntax into the plain sentence and its spans.
pub fn parse_annotated(annotated: &str) -> Result<(String, Vec<Span>), String> {
    let mut text = String::with_capacity(annotated.len());
    let mut spans = Vec::new();
    let mut rest = annotated;
    while let Some(open) = rest.find('[') {
        let after = &rest[open + 1..];
        let mut chars = after.chars();
        let kind = chars.next().and_then(SpanKind::from_marker);
        if kind.is_none() || chars.next() != Some(':') {
            // A bracket that does not start a marker is ordinary text.
            text.push_str(&rest[..=open]);
            rest = after;
            continue;
        }
        let body_start = 2;
        let close = after[body_start..]
            .find(']')
            .ok_or_else(|| format!("unclosed marker at `{}`", &rest[open..]))?;
        let body = &after[body_start..body_start + close];
        if body.contains('[') {
            return Err(format!("nested marker inside `[{}`", &after[..body_start + close]));
        }
        if body.is_empty() {
            return Err("empty marker".into());
        }
        text.push_str(&rest[..open]);
        let start = text.len();
        text.push_str(body);
        spans.push(Span { start, end: text.len(), kind: kind.expect("checked") });
        rest = &after[body_start + close + 1..];
    }
    text.push_str(rest);
    Ok((text, spans))
}

/// The sentence verbatim, or with every span wrapped in its marker.
pub fn render_sbvr(rule: &SbvrRule, mode: RenderMode) -> String {
    match mode {
        RenderMode::Plain => rule.text.clone(),
        RenderMode::Annotated => {
            let mut out = String::with_capacity(rule.text.len() + rule.spans.len() * 4);
            let mut at = 0;
            for span in &rule.spans {
                out.push_str(&rule.text[at..span.start]);
                out.push('[');
                out.push(span.kind.marker());
                out.push(':');
                out.push_str(rule.span_text(span));
                out.push(']');
                at = span.end;
            }
            out.push_str(&rule.text[at..]);
            out
        }
    }
}

/// Matching keys for concept and property spans, taken from ontology labels
/// and IRI local names.
#[derive(Debug, Clone, Default)]
pub struct SpanVocabulary {
    concepts: BTreeSet<String>,
    properties: BTreeSet<String>,
}

impl SpanVocabulary {
    pub fn from_ontology(onto: &Ontology) -> Self {
        let mut v = SpanVocabulary::default();
        for c in &onto.concepts {
            v.concepts.insert(canonical_label(onto.label_of(c)));
            v.concepts.insert(split_camel(c.local_name()));
        }
        for p in &onto.properties {
            if let Some(label) = onto.labels.get(p) {
                v.properties.insert(property_key(label));
            }
            v.properties.insert(property_key(&split_camel(p.local_name())));
        }
        v
    }

    pub fn knows_concept(&self, phrase: &str) -> bool {
        self.concepts.contains(&canonical_label(phrase))
    }

    pub fn knows_property(&self, phrase: &str) -> bool {
        self.properties.contains(&property_key(phrase))
    }

    /// One message per concept or property span with no matching label.
    pub fn check(&self, rule: &SbvrRule) -> Vec<String> {
        rule.spans
            .iter()
            .filter_map(|span| {
                let phrase = rule.span_text(span);
                let known = match span.kind {
                    SpanKind::Concept => self.knows_concept(phrase),
                    SpanKind::Property => self.knows_property(phrase),
                    SpanKind::Literal | SpanKind::Noun => true,
                };
                (!known).then(|| {
                    format!(
                        "{}: {} span `{phrase}` matches no ontology label",
                        rule.id,
                        if span.kind == SpanKind::Concept { "concept" } else { "property" }
                    )
                })
            })
            .collect()
    }
}
