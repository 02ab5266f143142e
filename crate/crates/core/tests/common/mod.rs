//! Brute-force reference evaluators and random input generators shared by
//! the property tests and the acceptance suite.

#![allow(dead_code)]

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::Rng;
use regcheck_core::kgstore::{Binding, Datatype, Graph, Iri, Literal, PatternTerm, Term, Triple, TriplePattern};
use regcheck_core::query::{CompareOp, FilterExpr, GroupPattern, Operand, Query, QueryForm};
use regcheck_core::vocab;

pub const EX: &str = "http://example.org/gen#";

pub fn ex(local: &str) -> Iri {
    Iri::new(format!("{EX}{local}")).unwrap()
}

// ---------------------------------------------------------------------------
// Pattern matching, filters and MINUS by exhaustive enumeration.

fn unify(pattern: &PatternTerm, value: &Term, binding: &mut Binding) -> bool {
    match pattern {
        PatternTerm::Term(t) => t == value,
        PatternTerm::Var(v) => match binding.get(v) {
            Some(bound) => bound == value,
            None => {
                binding.insert(v.clone(), value.clone());
                true
            }
        },
    }
}

/// Every substitution obtained by mapping each pattern onto some statement,
/// trying all |statements|^k combinations.
pub fn naive_match(triples: &[Triple], patterns: &[TriplePattern]) -> BTreeSet<Binding> {
    let mut out = BTreeSet::new();
    let k = patterns.len();
    if k == 0 {
        out.insert(Binding::new());
        return out;
    }
    let n = triples.len();
    if n == 0 {
        return out;
    }
    let mut choice = vec![0usize; k];
    loop {
        let mut binding = Binding::new();
        let ok = patterns.iter().zip(&choice).all(|(p, &i)| {
            let t = &triples[i];
            unify(&p.subject, &Term::Iri(t.subject.clone()), &mut binding)
                && unify(&p.predicate, &Term::Iri(t.predicate.clone()), &mut binding)
                && unify(&p.object, &t.object, &mut binding)
        });
        if ok {
            out.insert(binding);
        }
        let mut pos = 0;
        loop {
            if pos == k {
                return out;
            }
            choice[pos] += 1;
            if choice[pos] < n {
                break;
            }
            choice[pos] = 0;
            pos += 1;
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum Value<'a> {
    Int(i128),
    Dec(f64),
    Str(&'a str),
    Iri(&'a str),
}

fn value(term: &Term) -> Value<'_> {
    match term {
        Term::Iri(i) => Value::Iri(i.as_str()),
        Term::Literal(l) => match l.datatype() {
            Datatype::Integer => Value::Int(l.lexical().parse().unwrap()),
            Datatype::Decimal => Value::Dec(l.lexical().parse().unwrap()),
            Datatype::String => Value::Str(l.lexical()),
        },
    }
}

/// Integer cast: integers unchanged, strings holding an integer (surrounding
/// blanks allowed), decimals truncated toward zero. `None` is a type error.
pub fn oracle_cast(term: &Term) -> Option<Term> {
    let n: i128 = match value(term) {
        Value::Int(i) => i,
        Value::Str(s) => s.trim().parse().ok()?,
        Value::Dec(d) if d.is_finite() => d.trunc() as i128,
        _ => return None,
    };
    Some(Term::Literal(Literal::new(&n.to_string(), Datatype::Integer).ok()?))
}

fn apply(op: CompareOp, ord: Ordering) -> bool {
    match op {
        CompareOp::Eq => ord.is_eq(),
        CompareOp::Ne => ord.is_ne(),
        CompareOp::Lt => ord.is_lt(),
        CompareOp::Le => ord.is_le(),
        CompareOp::Gt => ord.is_gt(),
        CompareOp::Ge => ord.is_ge(),
    }
}

/// Comparison semantics: numeric by value, strings bytewise, IRIs under
/// equality only; other mixes are unequal and unordered.
pub fn oracle_compare(l: &Term, op: CompareOp, r: &Term) -> Option<bool> {
    let eq_only = matches!(op, CompareOp::Eq | CompareOp::Ne);
    let as_f64 = |v: Value| match v {
        Value::Int(i) => Some(i as f64),
        Value::Dec(d) => Some(d),
        _ => None,
    };
    match (value(l), value(r)) {
        (Value::Int(a), Value::Int(b)) => Some(apply(op, a.cmp(&b))),
        (a @ (Value::Int(_) | Value::Dec(_)), b @ (Value::Int(_) | Value::Dec(_))) => {
            as_f64(a)?.partial_cmp(&as_f64(b)?).map(|o| apply(op, o))
        }
        (Value::Str(a), Value::Str(b)) => Some(apply(op, a.as_bytes().cmp(b.as_bytes()))),
        (Value::Iri(a), Value::Iri(b)) if eq_only => Some((a == b) == (op == CompareOp::Eq)),
        _ if eq_only => Some(op == CompareOp::Ne),
        _ => None,
    }
}

fn operand(op: &Operand, b: &Binding) -> Option<Term> {
    match op {
        Operand::Const(t) => Some(t.clone()),
        Operand::Var(v) => b.get(v).cloned(),
        Operand::IntegerCast(v) => oracle_cast(b.get(v)?),
    }
}

fn passes(f: &FilterExpr, b: &Binding) -> bool {
    match (operand(&f.left, b), operand(&f.right, b)) {
        (Some(l), Some(r)) => oracle_compare(&l, f.op, &r).unwrap_or(false),
        _ => false,
    }
}

/// Solutions of a group: enumerated matches passing every filter, minus
/// those compatible with some MINUS solution on at least one shared variable.
pub fn oracle_group(triples: &[Triple], group: &GroupPattern) -> BTreeSet<Binding> {
    let mut sols: BTreeSet<Binding> = naive_match(triples, &group.triples)
        .into_iter()
        .filter(|b| group.filters.iter().all(|f| passes(f, b)))
        .collect();
    if let Some(minus) = &group.minus {
        let removed = oracle_group(triples, minus);
        sols.retain(|b| {
            !removed.iter().any(|m| {
                let shared: Vec<&String> = b.keys().filter(|k| m.contains_key(*k)).collect();
                !shared.is_empty() && shared.iter().all(|k| b[*k] == m[*k])
            })
        });
    }
    sols
}

pub fn oracle_ask(graph: &Graph, q: &Query) -> bool {
    let triples: Vec<Triple> = graph.iter().cloned().collect();
    !oracle_group(&triples, &q.body).is_empty()
}

/// Projected rows as a sorted multiset.
pub fn oracle_select(graph: &Graph, q: &Query) -> Vec<Binding> {
    let triples: Vec<Triple> = graph.iter().cloned().collect();
    let mut rows: Vec<Binding> = oracle_group(&triples, &q.body)
        .into_iter()
        .map(|b| b.into_iter().filter(|(k, _)| q.projection.contains(k)).collect())
        .collect();
    if q.distinct {
        rows = rows.into_iter().collect::<BTreeSet<_>>().into_iter().collect();
    }
    rows.sort();
    rows
}

// ---------------------------------------------------------------------------
// Inference and reduction references.

/// Applies the two inference rules to fixpoint by rescanning all statement
/// pairs until nothing new appears.
pub fn naive_closure(graph: &Graph) -> BTreeSet<Triple> {
    let sub = Iri::new(vocab::RDFS_SUBCLASS_OF).unwrap();
    let ty = Iri::new(vocab::RDF_TYPE).unwrap();
    let mut set: BTreeSet<Triple> = graph.iter().cloned().collect();
    loop {
        let mut new = Vec::new();
        for a in &set {
            for b in &set {
                let Term::Iri(mid) = &a.object else { continue };
                if b.predicate != sub || &b.subject != mid {
                    continue;
                }
                if a.predicate == sub && Term::Iri(a.subject.clone()) != b.object {
                    new.push(Triple::new(a.subject.clone(), sub.clone(), b.object.clone()));
                }
                if a.predicate == ty {
                    new.push(Triple::new(a.subject.clone(), ty.clone(), b.object.clone()));
                }
            }
        }
        let before = set.len();
        set.extend(new);
        if set.len() == before {
            return set;
        }
    }
}

/// Reachability of a directed graph on `0..n` by Floyd–Warshall.
pub fn reach(n: usize, edges: &BTreeSet<(usize, usize)>) -> Vec<Vec<bool>> {
    let mut r = vec![vec![false; n]; n];
    for &(a, b) in edges {
        r[a][b] = true;
    }
    for k in 0..n {
        for i in 0..n {
            if r[i][k] {
                let via = r[k].clone();
                for (j, &hop) in via.iter().enumerate() {
                    if hop {
                        r[i][j] = true;
                    }
                }
            }
        }
    }
    r
}

/// The unique transitive reduction of a DAG: edges of the closure with no
/// intermediate node.
pub fn naive_reduction(n: usize, edges: &BTreeSet<(usize, usize)>) -> BTreeSet<(usize, usize)> {
    let r = reach(n, edges);
    let mut out = BTreeSet::new();
    for a in 0..n {
        for b in 0..n {
            if r[a][b] && !(0..n).any(|c| c != a && c != b && r[a][c] && r[c][b]) {
                out.insert((a, b));
            }
        }
    }
    out
}

/// A random DAG on `n` nodes: edges only go from lower to higher rank under
/// a shuffled ranking.
pub fn random_dag(rng: &mut impl Rng, max_nodes: usize) -> (usize, BTreeSet<(usize, usize)>) {
    let n = rng.gen_range(1..=max_nodes);
    let mut rank: Vec<usize> = (0..n).collect();
    rank.shuffle(rng);
    let density: f64 = rng.gen_range(0.05..0.6);
    let mut edges = BTreeSet::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen_bool(density) {
                edges.insert((rank[i], rank[j]));
            }
        }
    }
    (n, edges)
}

pub fn node(i: usize) -> Iri {
    ex(&format!("N{i}"))
}

// ---------------------------------------------------------------------------
// Random graphs and queries.

const NODES: [&str; 6] = ["a", "b", "c", "d", "e", "f"];
const PREDICATES: [&str; 3] = ["p", "q", "r"];
const VARS: [&str; 4] = ["v", "w", "x", "y"];

pub fn random_literal(rng: &mut impl Rng) -> Literal {
    match rng.gen_range(0..4) {
        0 | 1 => Literal::integer(rng.gen_range(-2..6)),
        2 => Literal::new(["1.5", "2.0", "-0.5", "3.25"].choose(rng).unwrap(), Datatype::Decimal).unwrap(),
        _ => Literal::string(*["a", "b", " 3", "7", "x1"].choose(rng).unwrap()),
    }
}

fn random_object(rng: &mut impl Rng) -> Term {
    if rng.gen_bool(0.6) {
        Term::Iri(ex(NODES.choose(rng).unwrap()))
    } else {
        Term::Literal(random_literal(rng))
    }
}

pub fn random_graph(rng: &mut impl Rng, max_statements: usize) -> Graph {
    let mut g = Graph::new();
    g.set_prefix("ex", EX);
    let n = rng.gen_range(0..=max_statements);
    for _ in 0..n {
        let s = ex(NODES.choose(rng).unwrap());
        let p = ex(PREDICATES.choose(rng).unwrap());
        g.insert(Triple::new(s, p, random_object(rng)));
    }
    g
}

fn var(rng: &mut impl Rng) -> PatternTerm {
    PatternTerm::Var((*VARS.choose(rng).unwrap()).to_owned())
}

fn random_pattern(rng: &mut impl Rng) -> TriplePattern {
    let subject = if rng.gen_bool(0.7) { var(rng) } else { PatternTerm::Term(Term::Iri(ex(NODES.choose(rng).unwrap()))) };
    let predicate = if rng.gen_bool(0.2) { var(rng) } else { PatternTerm::Term(Term::Iri(ex(PREDICATES.choose(rng).unwrap()))) };
    let object = if rng.gen_bool(0.6) { var(rng) } else { PatternTerm::Term(random_object(rng)) };
    TriplePattern { subject, predicate, object }
}

const OPS: [CompareOp; 6] = [CompareOp::Eq, CompareOp::Ne, CompareOp::Lt, CompareOp::Le, CompareOp::Gt, CompareOp::Ge];

fn group_vars(triples: &[TriplePattern]) -> Vec<String> {
    let set: BTreeSet<String> = triples.iter().flat_map(|t| t.variables().map(str::to_owned)).collect();
    set.into_iter().collect()
}

fn random_filter(rng: &mut impl Rng, vars: &[String]) -> Option<FilterExpr> {
    let v = vars.choose(rng)?.clone();
    let left = if rng.gen_bool(0.3) { Operand::IntegerCast(v) } else { Operand::Var(v) };
    let right = match rng.gen_range(0..3) {
        0 => Operand::Var(vars.choose(rng).unwrap().clone()),
        1 => Operand::Const(Term::Iri(ex(NODES.choose(rng).unwrap()))),
        _ => Operand::Const(Term::Literal(random_literal(rng))),
    };
    let (left, right) = if rng.gen_bool(0.5) { (left, right) } else { (right, left) };
    Some(FilterExpr { left, op: *OPS.choose(rng).unwrap(), right })
}

fn random_group(rng: &mut impl Rng, max_patterns: usize) -> GroupPattern {
    let triples: Vec<TriplePattern> = (0..rng.gen_range(1..=max_patterns)).map(|_| random_pattern(rng)).collect();
    let vars = group_vars(&triples);
    let filters = if rng.gen_bool(0.5) { random_filter(rng, &vars).into_iter().collect() } else { vec![] };
    GroupPattern { triples, filters, minus: None }
}

/// A query with at most 3 body patterns, at most one filter overall and at
/// most one MINUS group.
pub fn random_query(rng: &mut impl Rng) -> Query {
    let mut body = random_group(rng, 3);
    if rng.gen_bool(0.4) {
        let mut minus = random_group(rng, 2);
        if !body.filters.is_empty() {
            minus.filters.clear();
        }
        body.minus = Some(Box::new(minus));
    }
    if rng.gen_bool(0.5) {
        let vars = group_vars(&body.triples);
        if vars.is_empty() {
            return Query::ask(body);
        }
        let mut projection: Vec<String> = vars.iter().filter(|_| rng.gen_bool(0.6)).cloned().collect();
        if projection.is_empty() {
            projection.push(vars.choose(rng).unwrap().clone());
        }
        Query { form: QueryForm::Select, distinct: rng.gen_bool(0.5), projection, body }
    } else {
        Query::ask(body)
    }
}

pub fn prefixes() -> BTreeMap<String, String> {
    let mut p = regcheck_core::kgstore::builtin_prefixes();
    p.insert("ex".into(), EX.into());
    p
}
