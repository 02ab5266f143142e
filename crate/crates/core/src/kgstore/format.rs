//! The line-oriented `.trp` triple file format.
//!
//! ```text
//! # comment
//! @prefix dt: <http://example.org/ontodt#> .
//! dt:tile1 rdf:type dt:Tile .
//! dt:tile1 dt:hasRecovery "8"^^integer .
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;

use thiserror::Error;

use super::graph::Graph;
use super::term::{escape_lexical, Datatype, Iri, Literal, Term, TermError, Triple};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("line {line}: syntax error: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: unknown prefix `{prefix}:`")]
    UnknownPrefix { line: usize, prefix: String },
    #[error("line {line}: {source}")]
    Term {
        line: usize,
        #[source]
        source: TermError,
    },
}

/// Why a name token could not be turned into an IRI.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum NameError {
    NotAName,
    UnknownPrefix(String),
    Invalid(TermError),
}

/// Resolves `<iri>` or `prefix:local` against a prefix table.
pub(crate) fn resolve_name(
    token: &str,
    prefixes: &BTreeMap<String, String>,
) -> Result<Iri, NameError> {
    if let Some(inner) = token.strip_prefix('<') {
        let inner = inner.strip_suffix('>').ok_or(NameError::NotAName)?;
        return Iri::new(inner).map_err(NameError::Invalid);
    }
    let (prefix, local) = token.split_once(':').ok_or(NameError::NotAName)?;
    if !prefix.chars().all(|c| c.is_alphanumeric() || c == '_' || c == '-') {
        return Err(NameError::NotAName);
    }
    let base = prefixes
        .get(prefix)
        .ok_or_else(|| NameError::UnknownPrefix(prefix.to_owned()))?;
    Iri::new(format!("{base}{local}")).map_err(NameError::Invalid)
}

/// Splits a line into whitespace-separated tokens, keeping quoted literals
/// (with their `^^datatype` suffix) as single tokens.
fn tokenize(line: &str) -> Result<Vec<String>, String> {
    let mut tokens = Vec::new();
    let mut chars = line.chars().peekable();
    while let Some(&c) = chars.peek() {
        if c.is_whitespace() {
            chars.next();
            continue;
        }
        let mut token = String::new();
        if c == '"' {
            token.push(chars.next().unwrap());
            let mut closed = false;
            while let Some(c) = chars.next() {
                token.push(c);
                if c == '\\' {
                    match chars.next() {
                        Some(e) => token.push(e),
                        None => return Err("dangling escape".into()),
                    }
                } else if c == '"' {
                    closed = true;
                    break;
                }
            }
            if !closed {
                return Err("unterminated string literal".into());
            }
        }
        while let Some(&c) = chars.peek() {
            if c.is_whitespace() {
                break;
            }
            token.push(c);
            chars.next();
        }
        tokens.push(token);
    }
    Ok(tokens)
}

pub(crate) fn unescape(body: &str) -> Result<String, String> {
    let mut out = String::with_capacity(body.len());
    let mut chars = body.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        match chars.next() {
            Some('"') => out.push('"'),
            Some('\\') => out.push('\\'),
            Some('n') => out.push('\n'),
            Some('t') => out.push('\t'),
            Some('r') => out.push('\r'),
            Some(other) => return Err(format!("unknown escape `\\{other}`")),
            None => return Err("dangling escape".into()),
        }
    }
    Ok(out)
}

fn parse_literal(token: &str, line: usize) -> Result<Term, ParseError> {
    let syntax = |message: String| ParseError::Syntax { line, message };
    let close = token.rfind('"').filter(|&i| i > 0).ok_or_else(|| syntax("bad literal".into()))?;
    let lexical = unescape(&token[1..close]).map_err(syntax)?;
    let suffix = &token[close + 1..];
    let datatype = if suffix.is_empty() {
        Datatype::String
    } else {
        let name = suffix
            .strip_prefix("^^")
            .ok_or_else(|| syntax(format!("unexpected `{suffix}` after literal")))?;
        Datatype::from_name(name).ok_or_else(|| syntax(format!("unknown datatype `{name}`")))?
    };
    Literal::new(&lexical, datatype)
        .map(Term::Literal)
        .map_err(|source| ParseError::Term { line, source })
}

fn parse_name(
    token: &str,
    prefixes: &BTreeMap<String, String>,
    line: usize,
) -> Result<Iri, ParseError> {
    resolve_name(token, prefixes).map_err(|e| match e {
        NameError::NotAName => ParseError::Syntax {
            line,
            message: format!("expected `<IRI>` or `prefix:local`, found `{token}`"),
        },
        NameError::UnknownPrefix(prefix) => ParseError::UnknownPrefix { line, prefix },
        NameError::Invalid(source) => ParseError::Term { line, source },
    })
}

/// Parses a `.trp` document.
pub fn parse_graph(text: &str) -> Result<Graph, ParseError> {
    let mut graph = Graph::new();
    parse_into(text, &mut graph)?;
    Ok(graph)
}

/// Parses a `.trp` document into an existing graph, sharing its prefixes.
pub fn parse_into(text: &str, graph: &mut Graph) -> Result<(), ParseError> {
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let syntax = |message: String| ParseError::Syntax { line, message };
        let tokens = tokenize(trimmed).map_err(syntax)?;
        if tokens.last().map(String::as_str) != Some(".") {
            return Err(syntax("statement must end with ` .`".into()));
        }
        let tokens = &tokens[..tokens.len() - 1];
        if tokens.first().map(String::as_str) == Some("@prefix") {
            let [_, name, iri] = tokens else {
                return Err(syntax("expected `@prefix p: <IRI> .`".into()));
            };
            let prefix = name
                .strip_suffix(':')
                .ok_or_else(|| syntax(format!("prefix name `{name}` must end with `:`")))?;
            let base = iri
                .strip_prefix('<')
                .and_then(|s| s.strip_suffix('>'))
                .ok_or_else(|| syntax(format!("prefix target `{iri}` must be `<IRI>`")))?;
            graph.set_prefix(prefix, base);
            continue;
        }
        let [s, p, o] = tokens else {
            return Err(syntax(format!("expected 3 terms, found {}", tokens.len())));
        };
        let subject = parse_name(s, graph.prefixes(), line)?;
        let predicate = parse_name(p, graph.prefixes(), line)?;
        let object = if o.starts_with('"') {
            parse_literal(o, line)?
        } else {
            Term::Iri(parse_name(o, graph.prefixes(), line)?)
        };
        graph.insert(Triple::new(subject, predicate, object));
    }
    Ok(())
}

fn is_local_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '-'
}

/// Writes an IRI as `prefix:local` when a declared prefix covers it and the
/// remainder is a plain name, else as `<IRI>`.
pub fn compact_iri(iri: &Iri, prefixes: &BTreeMap<String, String>) -> String {
    let best = prefixes
        .iter()
        .filter(|(_, base)| !base.is_empty() && iri.as_str().starts_with(base.as_str()))
        .map(|(p, base)| (p, &iri.as_str()[base.len()..]))
        .filter(|(_, local)| !local.is_empty() && local.chars().all(is_local_char))
        .min_by_key(|(p, local)| (local.len(), p.len()));
    match best {
        Some((prefix, local)) => format!("{prefix}:{local}"),
        None => format!("<{iri}>"),
    }
}

pub fn write_term(term: &Term, prefixes: &BTreeMap<String, String>) -> String {
    match term {
        Term::Iri(iri) => compact_iri(iri, prefixes),
        Term::Literal(lit) => {
            let mut s = format!("\"{}\"", escape_lexical(lit.lexical()));
            if lit.datatype() != Datatype::String {
                s.push_str("^^");
                s.push_str(lit.datatype().name());
            }
            s
        }
    }
}

/// Serializes a graph: non-builtin prefix declarations, then every
/// statement in ingest order.
pub fn serialize_graph(graph: &Graph) -> String {
    let builtin = super::graph::builtin_prefixes();
    let prefixes = graph.prefixes();
    let mut out = String::new();
    for (p, base) in prefixes {
        if builtin.get(p) != Some(base) {
            let _ = writeln!(out, "@prefix {p}: <{base}> .");
        }
    }
    if !out.is_empty() && !graph.is_empty() {
        out.push('\n');
    }
    for t in graph.iter() {
        let _ = writeln!(
            out,
            "{} {} {} .",
            compact_iri(&t.subject, prefixes),
            compact_iri(&t.predicate, prefixes),
            write_term(&t.object, prefixes)
        );
    }
    out
}
