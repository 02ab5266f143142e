use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TermError {
    #[error("IRI must be non-empty and contain no whitespace: {0:?}")]
    InvalidIri(String),
    #[error("malformed {datatype} literal: {lexical:?}")]
    MalformedLiteral { datatype: Datatype, lexical: String },
}

/// A fully expanded IRI.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Iri(String);

impl Iri {
    pub fn new(iri: impl Into<String>) -> Result<Self, TermError> {
        let iri = iri.into();
        if iri.is_empty() || iri.chars().any(char::is_whitespace) {
            return Err(TermError::InvalidIri(iri));
        }
        Ok(Iri(iri))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// The part after the last `#` or `/`, or the whole IRI.
    pub fn local_name(&self) -> &str {
        match self.0.rfind(['#', '/']) {
            Some(pos) if pos + 1 < self.0.len() => &self.0[pos + 1..],
            _ => &self.0,
        }
    }
}

impl fmt::Display for Iri {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl AsRef<str> for Iri {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Datatype {
    String,
    Integer,
    Decimal,
}

impl Datatype {
    pub fn name(self) -> &'static str {
        match self {
            Datatype::String => "string",
            Datatype::Integer => "integer",
            Datatype::Decimal => "decimal",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "string" => Some(Datatype::String),
            "integer" => Some(Datatype::Integer),
            "decimal" => Some(Datatype::Decimal),
            _ => None,
        }
    }
}

impl fmt::Display for Datatype {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A literal whose lexical form is stored canonicalized, so that derived
/// equality is value equality within a datatype: `"08"^^integer` and
/// `"8"^^integer` are the same literal.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Literal {
    lexical: String,
    datatype: Datatype,
}

impl Literal {
    pub fn new(lexical: &str, datatype: Datatype) -> Result<Self, TermError> {
        let canonical = match datatype {
            Datatype::String => Some(lexical.to_owned()),
            Datatype::Integer => canonical_integer(lexical),
            Datatype::Decimal => canonical_decimal(lexical),
        };
        canonical
            .map(|lexical| Literal { lexical, datatype })
            .ok_or_else(|| TermError::MalformedLiteral {
                datatype,
                lexical: lexical.to_owned(),
            })
    }

    pub fn string(value: impl Into<String>) -> Self {
        Literal {
            lexical: value.into(),
            datatype: Datatype::String,
        }
    }

    pub fn integer(value: i64) -> Self {
        Literal {
            lexical: value.to_string(),
            datatype: Datatype::Integer,
        }
    }

    pub fn lexical(&self) -> &str {
        &self.lexical
    }

    pub fn datatype(&self) -> Datatype {
        self.datatype
    }

    pub fn is_numeric(&self) -> bool {
        matches!(self.datatype, Datatype::Integer | Datatype::Decimal)
    }
}

fn split_sign(s: &str) -> (bool, &str) {
    if let Some(rest) = s.strip_prefix('-') {
        (true, rest)
    } else if let Some(rest) = s.strip_prefix('+') {
        (false, rest)
    } else {
        (false, s)
    }
}

fn canonical_integer(s: &str) -> Option<String> {
    let (negative, digits) = split_sign(s);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    let trimmed = digits.trim_start_matches('0');
    if trimmed.is_empty() {
        return Some("0".to_owned());
    }
    Some(if negative {
        format!("-{trimmed}")
    } else {
        trimmed.to_owned()
    })
}

fn canonical_decimal(s: &str) -> Option<String> {
    let (negative, body) = split_sign(s);
    let (int_part, frac_part) = match body.split_once('.') {
        Some((i, f)) => (i, f),
        None => (body, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit()) {
        return None;
    }
    let int_part = match int_part.trim_start_matches('0') {
        "" => "0",
        t => t,
    };
    let frac_part = match frac_part.trim_end_matches('0') {
        "" => "0",
        t => t,
    };
    let zero = int_part == "0" && frac_part == "0";
    Some(format!(
        "{}{int_part}.{frac_part}",
        if negative && !zero { "-" } else { "" }
    ))
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Iri(Iri),
    Literal(Literal),
}

impl Term {
    pub fn iri(iri: &str) -> Result<Self, TermError> {
        Iri::new(iri).map(Term::Iri)
    }

    pub fn as_iri(&self) -> Option<&Iri> {
        match self {
            Term::Iri(iri) => Some(iri),
            Term::Literal(_) => None,
        }
    }

    pub fn as_literal(&self) -> Option<&Literal> {
        match self {
            Term::Literal(lit) => Some(lit),
            Term::Iri(_) => None,
        }
    }

    /// IRI string or literal lexical form, used for ordering result rows.
    pub fn lexical_form(&self) -> &str {
        match self {
            Term::Iri(iri) => iri.as_str(),
            Term::Literal(lit) => lit.lexical(),
        }
    }
}

impl From<Iri> for Term {
    fn from(iri: Iri) -> Self {
        Term::Iri(iri)
    }
}

impl From<Literal> for Term {
    fn from(lit: Literal) -> Self {
        Term::Literal(lit)
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Iri(iri) => write!(f, "<{iri}>"),
            Term::Literal(lit) => {
                write!(f, "\"{}\"", escape_lexical(lit.lexical()))?;
                match lit.datatype() {
                    Datatype::String => Ok(()),
                    dt => write!(f, "^^{dt}"),
                }
            }
        }
    }
}

pub(crate) fn escape_lexical(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            '\r' => out.push_str("\\r"),
            c => out.push(c),
        }
    }
    out
}

/// A subject-predicate-object statement. Subject and predicate are IRIs by
/// construction.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Triple {
    pub subject: Iri,
    pub predicate: Iri,
    pub object: Term,
}

impl Triple {
    pub fn new(subject: Iri, predicate: Iri, object: impl Into<Term>) -> Self {
        Triple {
            subject,
            predicate,
            object: object.into(),
        }
    }
}
