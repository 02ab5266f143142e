//! The block-oriented `.rb.txt` rulebase format:
//!
//! ```text
//! @prefix dt: <http://example.org/ontodt#> .
//! RULE rules:P70
//! SOURCE Guide "Coverage and Tile"   DOMAIN Security   THEME Tile
//! APPLIES dt:Tile
//! SBVR-ID sbvr:P70
//! SBVR: If a [C:tile] ... at least [L:8 cm]
//! QUERY:
//! ASK { ... }
//! END
//! ```
//!
//! `SOURCE` and `SBVR-ID` are optional; the SBVR node defaults to the rule
//! IRI with a `_sbvr` suffix.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::OnceLock;

use regex::Regex;

use super::sbvr::{render_sbvr, RenderMode, SbvrRule, SpanVocabulary};
use super::{Rule, RuleSet, RulebaseError};
use crate::kgstore::{builtin_prefixes, compact_iri, resolve_name, Iri};
use crate::query::{parse_query, QueryForm};

fn prefix_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^@prefix\s+([A-Za-z0-9_-]*):\s*<([^>\s]+)>\s*\.?$").expect("valid regex"))
}

fn source_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(r"^SOURCE\b\s*(.*?)\s*\bDOMAIN\b\s*(.*?)\s*\bTHEME\b\s*(.*?)\s*$").expect("valid regex")
    })
}

#[derive(Default)]
struct Block {
    line: usize,
    id: Option<Iri>,
    source: Option<(String, String, String)>,
    applies: Option<Iri>,
    sbvr_id: Option<Iri>,
    sbvr: Option<String>,
    query: Option<String>,
}

fn syntax(line: usize, message: impl Into<String>) -> RulebaseError {
    RulebaseError::Syntax { line, message: message.into() }
}

impl Block {
    fn finish(self, prefixes: &BTreeMap<String, String>) -> Result<Rule, RulebaseError> {
        let line = self.line;
        let id = self.id.expect("block starts with RULE");
        let missing = |field: &str| syntax(line, format!("rule {id} has no {field}"));
        let applies_to = self.applies.clone().ok_or_else(|| missing("APPLIES line"))?;
        let annotated = self.sbvr.clone().ok_or_else(|| missing("SBVR line"))?;
        let query_text = self.query.clone().ok_or_else(|| missing("QUERY block"))?;
        let sbvr_id = match self.sbvr_id {
            Some(s) => s,
            None => Iri::new(format!("{id}_sbvr")).expect("suffix keeps the IRI valid"),
        };
        let mut sbvr = SbvrRule::from_annotated(sbvr_id, &annotated)?;
        if let Some((s, d, t)) = self.source {
            sbvr.source_doc = s;
            sbvr.domain_tag = d;
            sbvr.theme_tag = t;
        }
        sbvr.validate()?;
        let violation_query =
            parse_query(&query_text, prefixes).map_err(|source| RulebaseError::Query { rule: id.clone(), source })?;
        if violation_query.form != QueryForm::Ask {
            return Err(RulebaseError::NotAsk(id));
        }
        Ok(Rule { id, sbvr, violation_query, applies_to })
    }
}

/// Parses a rulebase document. When `vocabulary` is given, concept and
/// property spans that match no ontology label are reported as warnings.
pub fn load_rulebase(text: &str, vocabulary: Option<&SpanVocabulary>) -> Result<RuleSet, RulebaseError> {
    let mut prefixes = builtin_prefixes();
    let mut rules: Vec<Rule> = Vec::new();
    let mut current: Option<Block> = None;
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));

    let name = |token: &str, line: usize, prefixes: &BTreeMap<String, String>| {
        resolve_name(token.trim(), prefixes).map_err(|e| syntax(line, format!("bad IRI `{}`: {e:?}", token.trim())))
    };

    while let Some((n, raw)) = lines.next() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(cap) = prefix_re().captures(line) {
            prefixes.insert(cap[1].to_owned(), cap[2].to_owned());
            continue;
        }
        if let Some(rest) = line.strip_prefix("RULE ") {
            if let Some(done) = current.take() {
                rules.push(done.finish(&prefixes)?);
            }
            current = Some(Block { line: n, id: Some(name(rest, n, &prefixes)?), ..Default::default() });
            continue;
        }
        let block = current.as_mut().ok_or_else(|| syntax(n, "expected RULE"))?;
        if line.starts_with("SOURCE") {
            let cap = source_re()
                .captures(line)
                .ok_or_else(|| syntax(n, "expected `SOURCE <text> DOMAIN <text> THEME <text>`"))?;
            block.source = Some((cap[1].to_owned(), cap[2].to_owned(), cap[3].to_owned()));
        } else if let Some(rest) = line.strip_prefix("APPLIES ") {
            block.applies = Some(name(rest, n, &prefixes)?);
        } else if let Some(rest) = line.strip_prefix("SBVR-ID ") {
            block.sbvr_id = Some(name(rest, n, &prefixes)?);
        } else if let Some(rest) = line.strip_prefix("SBVR:") {
            block.sbvr = Some(rest.trim().to_owned());
        } else if line == "QUERY:" {
            let mut body = Vec::new();
            loop {
                match lines.next() {
                    Some((_, l)) if l.trim() == "END" => break,
                    Some((_, l)) => body.push(l),
                    None => return Err(syntax(n, "QUERY block is not terminated by END")),
                }
            }
            block.query = Some(body.join("\n"));
        } else {
            return Err(syntax(n, format!("unrecognized line `{line}`")));
        }
    }
    if let Some(done) = current.take() {
        rules.push(done.finish(&prefixes)?);
    }

    let mut seen = BTreeSet::new();
    for r in &rules {
        if !seen.insert(&r.id) {
            return Err(RulebaseError::DuplicateRule(r.id.clone()));
        }
    }
    let warnings = vocabulary
        .map(|v| rules.iter().flat_map(|r| v.check(&r.sbvr)).collect())
        .unwrap_or_default();
    Ok(RuleSet { rules, prefixes, warnings })
}

/// Serializes rules in order; loading the result yields the same rules.
pub fn write_rulebase(rules: &[Rule], prefixes: &BTreeMap<String, String>) -> String {
    let builtin = builtin_prefixes();
    let mut out = String::new();
    for (p, base) in prefixes {
        if builtin.get(p) != Some(base) {
            out.push_str(&format!("@prefix {p}: <{base}> .\n"));
        }
    }
    for rule in rules {
        out.push('\n');
        out.push_str(&format!("RULE {}\n", compact_iri(&rule.id, prefixes)));
        let s = &rule.sbvr;
        if !(s.source_doc.is_empty() && s.domain_tag.is_empty() && s.theme_tag.is_empty()) {
            out.push_str(&format!("SOURCE {}   DOMAIN {}   THEME {}\n", s.source_doc, s.domain_tag, s.theme_tag));
        }
        out.push_str(&format!("APPLIES {}\n", compact_iri(&rule.applies_to, prefixes)));
        out.push_str(&format!("SBVR-ID {}\n", compact_iri(&s.id, prefixes)));
        out.push_str(&format!("SBVR: {}\n", render_sbvr(s, RenderMode::Annotated)));
        out.push_str("QUERY:\n");
        out.push_str(&rule.violation_query.to_text(prefixes));
        out.push_str("\nEND\n");
    }
    out
}
