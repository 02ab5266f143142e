use std::cmp::Ordering;
use std::collections::BTreeSet;

use log::debug;
use thiserror::Error;

use super::{CompareOp, FilterExpr, GroupPattern, Operand, Query, QueryError, QueryForm};
use crate::kgstore::{Binding, Datatype, Graph, Literal, Term};

/// Why a filter could not be evaluated for one binding. Such a binding is
/// eliminated.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FilterError {
    #[error("?{0} is unbound")]
    Unbound(String),
    #[error("cannot cast {0} to an integer")]
    BadCast(String),
    #[error("cannot order {0} against {1}")]
    Incomparable(String, String),
}

#[derive(Debug, Clone, Copy)]
enum Number {
    Int(i128),
    Dec(f64),
}

impl Number {
    fn of(lit: &Literal) -> Option<Number> {
        match lit.datatype() {
            Datatype::Integer => lit.lexical().parse().ok().map(Number::Int),
            Datatype::Decimal => lit.lexical().parse().ok().map(Number::Dec),
            Datatype::String => None,
        }
    }

    fn cmp(self, other: Number) -> Option<Ordering> {
        match (self, other) {
            (Number::Int(a), Number::Int(b)) => Some(a.cmp(&b)),
            (a, b) => a.as_f64().partial_cmp(&b.as_f64()),
        }
    }

    fn as_f64(self) -> f64 {
        match self {
            Number::Int(i) => i as f64,
            Number::Dec(d) => d,
        }
    }
}

fn cast_integer(term: &Term) -> Result<Term, FilterError> {
    let bad = || FilterError::BadCast(term.to_string());
    let lit = term.as_literal().ok_or_else(bad)?;
    let value: i128 = match lit.datatype() {
        Datatype::Integer => return Ok(term.clone()),
        Datatype::String => lit.lexical().trim().parse().map_err(|_| bad())?,
        Datatype::Decimal => {
            let d: f64 = lit.lexical().parse().map_err(|_| bad())?;
            if !d.is_finite() {
                return Err(bad());
            }
            d.trunc() as i128
        }
    };
    Literal::new(&value.to_string(), Datatype::Integer)
        .map(Term::Literal)
        .map_err(|_| bad())
}

fn operand_value(op: &Operand, binding: &Binding) -> Result<Term, FilterError> {
    match op {
        Operand::Const(t) => Ok(t.clone()),
        Operand::Var(v) => binding.get(v).cloned().ok_or_else(|| FilterError::Unbound(v.clone())),
        Operand::IntegerCast(v) => {
            let t = binding.get(v).ok_or_else(|| FilterError::Unbound(v.clone()))?;
            cast_integer(t)
        }
    }
}

fn holds(op: CompareOp, ord: Ordering) -> bool {
    match op {
        CompareOp::Eq => ord == Ordering::Equal,
        CompareOp::Ne => ord != Ordering::Equal,
        CompareOp::Lt => ord == Ordering::Less,
        CompareOp::Le => ord != Ordering::Greater,
        CompareOp::Gt => ord == Ordering::Greater,
        CompareOp::Ge => ord != Ordering::Less,
    }
}

/// Compares two terms.
///
/// Numbers compare by value (exactly between integers, as floats once a
/// decimal is involved), plain strings bytewise, IRIs by identity under `=`
/// and `!=` only. Terms of different kinds are never equal; ordering them is
/// an error.
pub fn compare(left: &Term, op: CompareOp, right: &Term) -> Result<bool, FilterError> {
    let incomparable = || FilterError::Incomparable(left.to_string(), right.to_string());
    let equality_only = matches!(op, CompareOp::Eq | CompareOp::Ne);
    match (left, right) {
        (Term::Literal(a), Term::Literal(b)) => {
            match (Number::of(a), Number::of(b)) {
                (Some(x), Some(y)) => return x.cmp(y).map(|o| holds(op, o)).ok_or_else(incomparable),
                (None, None) if a.datatype() == Datatype::String && b.datatype() == Datatype::String => {
                    return Ok(holds(op, a.lexical().as_bytes().cmp(b.lexical().as_bytes())));
                }
                _ => {}
            }
        }
        (Term::Iri(a), Term::Iri(b)) if equality_only => return Ok(holds(op, if a == b { Ordering::Equal } else { Ordering::Less })),
        _ => {}
    }
    if equality_only {
        Ok(op == CompareOp::Ne)
    } else {
        Err(incomparable())
    }
}

fn filter_holds(f: &FilterExpr, binding: &Binding) -> Result<bool, FilterError> {
    let l = operand_value(&f.left, binding)?;
    let r = operand_value(&f.right, binding)?;
    compare(&l, f.op, &r)
}

fn compatible(a: &Binding, b: &Binding) -> (bool, bool) {
    let mut shared = false;
    for (k, v) in a {
        if let Some(w) = b.get(k) {
            if v != w {
                return (false, true);
            }
            shared = true;
        }
    }
    (true, shared)
}

/// Solutions of one group: the join of its triples, restricted by its
/// filters, minus every solution compatible with its `MINUS` group.
pub fn eval_group(graph: &Graph, group: &GroupPattern) -> Vec<Binding> {
    let mut solutions: Vec<Binding> = graph
        .match_pattern(&group.triples)
        .into_iter()
        .filter(|b| {
            group.filters.iter().all(|f| match filter_holds(f, b) {
                Ok(v) => v,
                Err(e) => {
                    debug!("filter error eliminates binding: {e}");
                    false
                }
            })
        })
        .collect();
    if let Some(minus) = &group.minus {
        let removed = eval_group(graph, minus);
        solutions.retain(|b| {
            !removed.iter().any(|m| {
                let (ok, shared) = compatible(b, m);
                ok && shared
            })
        });
    }
    solutions
}

/// Full solution bindings of a query body, in join order.
pub fn solutions(graph: &Graph, query: &Query) -> Vec<Binding> {
    eval_group(graph, &query.body)
}

pub fn eval_ask(graph: &Graph, query: &Query) -> Result<bool, QueryError> {
    if query.form != QueryForm::Ask {
        return Err(QueryError::WrongForm { expected: "ASK" });
    }
    Ok(!eval_group(graph, &query.body).is_empty())
}

/// Projected rows, sorted by the lexical forms of the projected values in
/// projection order. `DISTINCT` removes duplicate rows.
pub fn eval_select(graph: &Graph, query: &Query) -> Result<Vec<Binding>, QueryError> {
    if query.form != QueryForm::Select {
        return Err(QueryError::WrongForm { expected: "SELECT" });
    }
    let mut rows: Vec<Binding> = eval_group(graph, &query.body)
        .into_iter()
        .map(|b| {
            query
                .projection
                .iter()
                .filter_map(|v| b.get(v).map(|t| (v.clone(), t.clone())))
                .collect()
        })
        .collect();
    if query.distinct {
        let mut seen = BTreeSet::new();
        rows.retain(|r| seen.insert(r.clone()));
    }
    let key = |r: &Binding| -> Vec<(String, Term)> {
        query
            .projection
            .iter()
            .map(|v| r.get(v).map(|t| (t.lexical_form().to_owned(), t.clone())))
            .map(|x| x.unwrap_or_else(|| (String::new(), Term::Literal(Literal::string("")))))
            .collect()
    };
    rows.sort_by_cached_key(key);
    Ok(rows)
}
