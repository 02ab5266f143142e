use std::collections::BTreeMap;
use std::sync::OnceLock;

use regex::Regex;

use super::{parse_query, QueryError};
use crate::kgstore::{write_term, Datatype, Term};

fn placeholder_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"\{\{\s*([A-Za-z_][A-Za-z0-9_-]*)\s*\}\}").expect("valid regex"))
}

/// Placeholder names in order of first appearance.
pub fn placeholders(template: &str) -> Vec<String> {
    let mut names: Vec<String> = Vec::new();
    for cap in placeholder_re().captures_iter(template) {
        if !names.iter().any(|n| n == &cap[1]) {
            names.push(cap[1].to_owned());
        }
    }
    names
}

/// How a parameter value is spelled inside query text: IRIs in angle
/// brackets, numbers as bare numerals, strings quoted.
pub fn render_parameter(term: &Term) -> String {
    match term {
        Term::Literal(lit) if lit.datatype() != Datatype::String => lit.lexical().to_owned(),
        other => write_term(other, &BTreeMap::new()),
    }
}

/// Substitutes every `{{name}}` and checks that the result parses.
pub fn instantiate_template(
    template: &str,
    params: &BTreeMap<String, Term>,
    prefixes: &BTreeMap<String, String>,
) -> Result<String, QueryError> {
    if let Some(missing) = placeholders(template).into_iter().find(|n| !params.contains_key(n)) {
        return Err(QueryError::MissingParameter(missing));
    }
    let text = placeholder_re()
        .replace_all(template, |cap: &regex::Captures| render_parameter(&params[&cap[1]]))
        .into_owned();
    parse_query(&text, prefixes).map_err(|e| QueryError::BadInstantiation(Box::new(e)))?;
    Ok(text)
}
