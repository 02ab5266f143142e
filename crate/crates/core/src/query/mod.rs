//! The query subset used by compliance rules and justification lookups:
//! `ASK` and `SELECT [DISTINCT]` over basic graph patterns, `FILTER`
//! comparisons with an `xsd:integer(?v)` cast, and one level of `MINUS`.

mod eval;
mod parser;
mod template;

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::kgstore::{compact_iri, Datatype, PatternTerm, Term, TriplePattern};

pub use eval::{compare, eval_ask, eval_group, eval_select, solutions, FilterError};
pub use parser::parse_query;
pub use template::{instantiate_template, placeholders, render_parameter};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QueryError {
    #[error("{line}:{col}: syntax error: {message}")]
    Syntax { line: usize, col: usize, message: String },
    #[error("{line}:{col}: unknown prefix `{prefix}:`")]
    UnknownPrefix { line: usize, col: usize, prefix: String },
    #[error("projected variable ?{0} does not occur in the query body")]
    UnboundProjection(String),
    #[error("filter `{0}` references no variable of its group")]
    FilterWithoutVariable(String),
    #[error("MINUS groups cannot be nested")]
    NestedMinus,
    #[error("no value supplied for placeholder {{{{{0}}}}}")]
    MissingParameter(String),
    #[error("instantiated query does not parse: {0}")]
    BadInstantiation(Box<QueryError>),
    #[error("expected an {expected} query")]
    WrongForm { expected: &'static str },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QueryForm {
    Ask,
    Select,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CompareOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CompareOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CompareOp::Eq => "=",
            CompareOp::Ne => "!=",
            CompareOp::Lt => "<",
            CompareOp::Le => "<=",
            CompareOp::Gt => ">",
            CompareOp::Ge => ">=",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Operand {
    Var(String),
    Const(Term),
    /// `xsd:integer(?v)`
    IntegerCast(String),
}

impl Operand {
    pub fn variable(&self) -> Option<&str> {
        match self {
            Operand::Var(v) | Operand::IntegerCast(v) => Some(v),
            Operand::Const(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FilterExpr {
    pub left: Operand,
    pub op: CompareOp,
    pub right: Operand,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct GroupPattern {
    pub triples: Vec<TriplePattern>,
    pub filters: Vec<FilterExpr>,
    pub minus: Option<Box<GroupPattern>>,
}

impl GroupPattern {
    pub fn binds(&self, var: &str) -> bool {
        self.triples.iter().any(|t| t.variables().any(|v| v == var))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Query {
    pub form: QueryForm,
    /// SELECT only.
    pub distinct: bool,
    /// SELECT only; variable names without `?`.
    pub projection: Vec<String>,
    pub body: GroupPattern,
}

impl Query {
    pub fn ask(body: GroupPattern) -> Self {
        Query {
            form: QueryForm::Ask,
            distinct: false,
            projection: Vec::new(),
            body,
        }
    }

    /// Serializes with IRIs compacted against `prefixes`; the result parses
    /// back to the same query under the same prefix table.
    pub fn to_text(&self, prefixes: &BTreeMap<String, String>) -> String {
        let mut out = String::new();
        match self.form {
            QueryForm::Ask => out.push_str("ASK "),
            QueryForm::Select => {
                out.push_str("SELECT ");
                if self.distinct {
                    out.push_str("DISTINCT ");
                }
                for v in &self.projection {
                    out.push('?');
                    out.push_str(v);
                    out.push(' ');
                }
                out.push_str("WHERE ");
            }
        }
        write_group(&mut out, &self.body, 0, prefixes);
        out
    }
}

impl fmt::Display for Query {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text(&BTreeMap::new()))
    }
}

fn write_query_term(term: &Term, prefixes: &BTreeMap<String, String>) -> String {
    match term {
        Term::Iri(iri) => compact_iri(iri, prefixes),
        Term::Literal(lit) => match lit.datatype() {
            Datatype::Integer | Datatype::Decimal => lit.lexical().to_owned(),
            Datatype::String => crate::kgstore::write_term(term, prefixes),
        },
    }
}

fn write_pattern_term(pt: &PatternTerm, prefixes: &BTreeMap<String, String>) -> String {
    match pt {
        PatternTerm::Var(v) => format!("?{v}"),
        PatternTerm::Term(t) => write_query_term(t, prefixes),
    }
}

fn write_operand(op: &Operand, prefixes: &BTreeMap<String, String>) -> String {
    match op {
        Operand::Var(v) => format!("?{v}"),
        Operand::IntegerCast(v) => format!("xsd:integer(?{v})"),
        Operand::Const(t) => write_query_term(t, prefixes),
    }
}

fn write_group(out: &mut String, group: &GroupPattern, depth: usize, prefixes: &BTreeMap<String, String>) {
    let pad = "  ".repeat(depth + 1);
    out.push_str("{\n");
    for t in &group.triples {
        out.push_str(&format!(
            "{pad}{} {} {}\n",
            write_pattern_term(&t.subject, prefixes),
            write_pattern_term(&t.predicate, prefixes),
            write_pattern_term(&t.object, prefixes)
        ));
    }
    for f in &group.filters {
        out.push_str(&format!(
            "{pad}FILTER ({} {} {})\n",
            write_operand(&f.left, prefixes),
            f.op.symbol(),
            write_operand(&f.right, prefixes)
        ));
    }
    if let Some(minus) = &group.minus {
        out.push_str(&pad);
        out.push_str("MINUS ");
        write_group(out, minus, depth + 1, prefixes);
        out.push('\n');
    }
    out.push_str(&"  ".repeat(depth));
    out.push('}');
}
