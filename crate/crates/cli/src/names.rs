use std::collections::{BTreeMap, BTreeSet};

use anyhow::{anyhow, bail, Result};
use regcheck_core::kgstore::{Datatype, Graph, Iri, Literal, Term};
use regcheck_core::vocab;

/// Reads an IRI written as `<full>`, `prefix:local` or a bare absolute IRI.
pub fn resolve_iri(text: &str, prefixes: &BTreeMap<String, String>) -> Result<Iri> {
    let text = text.trim();
    if let Some(inner) = text.strip_prefix('<').and_then(|t| t.strip_suffix('>')) {
        return Iri::new(inner).map_err(|e| anyhow!("`{text}`: {e}"));
    }
    if let Some((prefix, local)) = text.split_once(':') {
        if let Some(base) = prefixes.get(prefix) {
            return Iri::new(format!("{base}{local}")).map_err(|e| anyhow!("`{text}`: {e}"));
        }
        if local.starts_with("//") {
            return Iri::new(text).map_err(|e| anyhow!("`{text}`: {e}"));
        }
        bail!("`{text}`: unknown prefix `{prefix}:`");
    }
    bail!("`{text}` is not an IRI (use <iri> or prefix:local)")
}

fn iris_in(graph: &Graph) -> BTreeSet<&Iri> {
    let mut out = BTreeSet::new();
    for t in graph.iter() {
        out.insert(&t.subject);
        if let Term::Iri(o) = &t.object {
            out.insert(o);
        }
    }
    out
}

/// Reads a `--param` value. Besides IRI and literal spellings, a bare name
/// such as `P70` stands for the IRI of the graph with that local name;
/// rule IRIs win over document IRIs, which win over any other namespace.
pub fn param_value(text: &str, graph: &Graph, prefixes: &BTreeMap<String, String>) -> Result<Term> {
    let text = text.trim();
    if text.len() >= 2 && text.starts_with('"') && text.ends_with('"') {
        return Ok(Term::Literal(Literal::string(&text[1..text.len() - 1])));
    }
    if text.parse::<i64>().is_ok() {
        return Ok(Term::Literal(Literal::new(text, Datatype::Integer)?));
    }
    if let Ok(lit) = Literal::new(text, Datatype::Decimal) {
        return Ok(Term::Literal(lit));
    }
    if text.starts_with('<') || text.contains(':') {
        return resolve_iri(text, prefixes).map(Term::Iri);
    }
    let mut matches: Vec<&Iri> = iris_in(graph).into_iter().filter(|i| i.local_name() == text).collect();
    for preferred in [vocab::RULES, vocab::DT] {
        if matches.len() > 1 && matches.iter().any(|i| i.as_str().starts_with(preferred)) {
            matches.retain(|i| i.as_str().starts_with(preferred));
        }
    }
    match matches.as_slice() {
        [one] => Ok(Term::Iri((*one).clone())),
        [] => bail!("no IRI in the graph has local name `{text}`"),
        many => bail!(
            "`{text}` is ambiguous: {}",
            many.iter().map(|i| i.as_str()).collect::<Vec<_>>().join(", ")
        ),
    }
}
