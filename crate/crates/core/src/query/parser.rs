use std::collections::BTreeMap;

use super::{CompareOp, FilterExpr, GroupPattern, Operand, Query, QueryError, QueryForm};
use crate::kgstore::{resolve_name, unescape, Datatype, Literal, NameError, PatternTerm, Term, TriplePattern};
use crate::vocab;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    LBrace,
    RBrace,
    LParen,
    RParen,
    Dot,
    Var(String),
    /// `<...>` or `prefix:local`, unresolved.
    Name(String),
    Str { lexical: String, datatype: Option<String> },
    Number(String),
    Op(CompareOp),
    Word(String),
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

struct Lexer<'a> {
    chars: std::iter::Peekable<std::str::CharIndices<'a>>,
    line: usize,
    col: usize,
}

fn is_name_char(c: char) -> bool {
    !c.is_whitespace() && !"{}()<>\"=!,;".contains(c)
}

impl<'a> Lexer<'a> {
    fn new(text: &'a str) -> Self {
        Lexer {
            chars: text.char_indices().peekable(),
            line: 1,
            col: 1,
        }
    }

    fn bump(&mut self) -> Option<char> {
        let (_, c) = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn peek(&mut self) -> Option<char> {
        self.chars.peek().map(|&(_, c)| c)
    }

    fn err(&self, line: usize, col: usize, message: impl Into<String>) -> QueryError {
        QueryError::Syntax { line, col, message: message.into() }
    }

    fn take_while(&mut self, pred: impl Fn(char) -> bool) -> String {
        let mut s = String::new();
        while let Some(c) = self.peek() {
            if !pred(c) {
                break;
            }
            s.push(c);
            self.bump();
        }
        s
    }

    fn tokens(mut self) -> Result<Vec<Spanned>, QueryError> {
        let mut out = Vec::new();
        loop {
            while self.peek().is_some_and(char::is_whitespace) {
                self.bump();
            }
            let (line, col) = (self.line, self.col);
            let Some(c) = self.peek() else { break };
            let tok = match c {
                '#' => {
                    self.take_while(|c| c != '\n');
                    continue;
                }
                '{' => {
                    self.bump();
                    if self.peek() == Some('{') {
                        return Err(self.err(line, col, "uninstantiated `{{placeholder}}`"));
                    }
                    Tok::LBrace
                }
                '}' => {
                    self.bump();
                    Tok::RBrace
                }
                '(' => {
                    self.bump();
                    Tok::LParen
                }
                ')' => {
                    self.bump();
                    Tok::RParen
                }
                '.' if !self.next_is_digit_after_dot() => {
                    self.bump();
                    Tok::Dot
                }
                '?' | '$' => {
                    self.bump();
                    let name = self.take_while(|c| c.is_alphanumeric() || c == '_');
                    if name.is_empty() {
                        return Err(self.err(line, col, "empty variable name"));
                    }
                    Tok::Var(name)
                }
                '=' => {
                    self.bump();
                    Tok::Op(CompareOp::Eq)
                }
                '!' => {
                    self.bump();
                    if self.peek() != Some('=') {
                        return Err(self.err(line, col, "expected `!=`"));
                    }
                    self.bump();
                    Tok::Op(CompareOp::Ne)
                }
                '<' => self.angle(),
                '>' => {
                    self.bump();
                    if self.peek() == Some('=') {
                        self.bump();
                        Tok::Op(CompareOp::Ge)
                    } else {
                        Tok::Op(CompareOp::Gt)
                    }
                }
                '"' => self.string(line, col)?,
                c if c.is_ascii_digit() || c == '-' || c == '+' || c == '.' => {
                    let num = self.take_while(|c| c.is_ascii_digit() || "+-.".contains(c));
                    push_with_dots(&mut out, num, line, col, Tok::Number);
                    continue;
                }
                _ => {
                    let word = self.take_while(is_name_char);
                    if word.is_empty() {
                        return Err(self.err(line, col, format!("unexpected character `{c}`")));
                    }
                    push_with_dots(&mut out, word, line, col, classify_word);
                    continue;
                }
            };
            out.push(Spanned { tok, line, col });
        }
        Ok(out)
    }

    fn next_is_digit_after_dot(&self) -> bool {
        let mut it = self.chars.clone();
        it.next();
        it.next().is_some_and(|(_, c)| c.is_ascii_digit())
    }

    /// `<IRI>`, `<` or `<=`: an IRI has no whitespace and closes with `>`.
    fn angle(&mut self) -> Tok {
        let mut probe = self.chars.clone();
        probe.next();
        let mut iri = String::new();
        let mut closed = false;
        for (_, c) in probe {
            if c == '>' {
                closed = true;
                break;
            }
            if c.is_whitespace() || c == '<' || c == '"' {
                break;
            }
            iri.push(c);
        }
        if closed && !iri.is_empty() && !iri.starts_with('=') {
            for _ in 0..iri.chars().count() + 2 {
                self.bump();
            }
            return Tok::Name(format!("<{iri}>"));
        }
        self.bump();
        if self.peek() == Some('=') {
            self.bump();
            return Tok::Op(CompareOp::Le);
        }
        Tok::Op(CompareOp::Lt)
    }

    fn string(&mut self, line: usize, col: usize) -> Result<Tok, QueryError> {
        self.bump();
        let mut body = String::new();
        loop {
            match self.bump() {
                None | Some('\n') => return Err(self.err(line, col, "unterminated string")),
                Some('\\') => {
                    body.push('\\');
                    match self.bump() {
                        Some(c) => body.push(c),
                        None => return Err(self.err(line, col, "unterminated string")),
                    }
                }
                Some('"') => break,
                Some(c) => body.push(c),
            }
        }
        let lexical = unescape(&body).map_err(|m| self.err(line, col, m))?;
        let datatype = if self.peek() == Some('^') {
            self.bump();
            if self.bump() != Some('^') {
                return Err(self.err(line, col, "expected `^^` after literal"));
            }
            if self.peek() == Some('<') {
                self.bump();
                let iri = self.take_while(|c| c != '>');
                self.bump();
                Some(format!("<{iri}>"))
            } else {
                Some(self.take_while(|c| is_name_char(c) && c != '.'))
            }
        } else {
            None
        };
        Ok(Tok::Str { lexical, datatype })
    }
}

/// A trailing `.` terminates a triple rather than the token before it.
fn push_with_dots(out: &mut Vec<Spanned>, word: String, line: usize, col: usize, make: fn(String) -> Tok) {
    let trimmed = word.trim_end_matches('.');
    let dots = word.len() - trimmed.len();
    if !trimmed.is_empty() {
        out.push(Spanned { tok: make(trimmed.to_owned()), line, col });
    }
    for i in 0..dots {
        out.push(Spanned { tok: Tok::Dot, line, col: col + trimmed.chars().count() + i });
    }
}

fn classify_word(word: String) -> Tok {
    if word.contains(':') {
        Tok::Name(word)
    } else {
        Tok::Word(word)
    }
}

fn datatype_from(name: &str) -> Option<Datatype> {
    let local = name
        .strip_prefix("xsd:")
        .or_else(|| name.strip_prefix('<').and_then(|s| s.strip_suffix('>')).and_then(|s| s.strip_prefix(vocab::XSD)))
        .unwrap_or(name);
    Datatype::from_name(local)
}

fn is_integer_cast(name: &str) -> bool {
    name == "xsd:integer" || name == format!("<{}integer>", vocab::XSD)
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    prefixes: BTreeMap<String, String>,
    end: (usize, usize),
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|s| &s.tok)
    }

    fn here(&self) -> (usize, usize) {
        self.toks.get(self.pos).map(|s| (s.line, s.col)).unwrap_or(self.end)
    }

    fn err(&self, message: impl Into<String>) -> QueryError {
        let (line, col) = self.here();
        QueryError::Syntax { line, col, message: message.into() }
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|s| s.tok.clone());
        self.pos += 1;
        t
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<(), QueryError> {
        if self.peek() == Some(&want) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(format!("expected {what}")))
        }
    }

    fn keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Some(Tok::Word(w)) if w.eq_ignore_ascii_case(kw))
    }

    fn resolve(&self, name: &str) -> Result<Term, QueryError> {
        let (line, col) = self.here();
        resolve_name(name, &self.prefixes)
            .map(Term::Iri)
            .map_err(|e| match e {
                NameError::UnknownPrefix(prefix) => QueryError::UnknownPrefix { line, col, prefix },
                NameError::NotAName => QueryError::Syntax { line, col, message: format!("bad name `{name}`") },
                NameError::Invalid(e) => QueryError::Syntax { line, col, message: e.to_string() },
            })
    }

    fn literal(&self, lexical: &str, datatype: Option<&str>) -> Result<Term, QueryError> {
        let dt = match datatype {
            None => Datatype::String,
            Some(name) => datatype_from(name).ok_or_else(|| self.err(format!("unknown datatype `{name}`")))?,
        };
        Literal::new(lexical, dt).map(Term::Literal).map_err(|e| self.err(e.to_string()))
    }

    fn number(&self, text: &str) -> Result<Term, QueryError> {
        let dt = if text.contains('.') { Datatype::Decimal } else { Datatype::Integer };
        Literal::new(text, dt)
            .map(Term::Literal)
            .map_err(|_| self.err(format!("malformed number `{text}`")))
    }

    /// Consumes the current token as a term; the cursor has already been
    /// positioned on it.
    fn term(&mut self) -> Result<PatternTerm, QueryError> {
        let tok = self.peek().cloned().ok_or_else(|| self.err("unexpected end of query"))?;
        let term = match &tok {
            Tok::Var(v) => PatternTerm::Var(v.clone()),
            Tok::Name(n) => PatternTerm::Term(self.resolve(n)?),
            Tok::Str { lexical, datatype } => PatternTerm::Term(self.literal(lexical, datatype.as_deref())?),
            Tok::Number(n) => PatternTerm::Term(self.number(n)?),
            Tok::Word(w) if w == "a" => PatternTerm::Term(Term::iri(vocab::RDF_TYPE).expect("valid")),
            other => return Err(self.err(format!("expected a term, found {}", describe(other)))),
        };
        self.pos += 1;
        Ok(term)
    }

    /// A subject or predicate: a variable or an IRI.
    fn node_term(&mut self) -> Result<PatternTerm, QueryError> {
        let at = self.pos;
        let t = self.term()?;
        if let PatternTerm::Term(Term::Literal(_)) = t {
            self.pos = at;
            return Err(self.err("a literal cannot be a subject or predicate"));
        }
        Ok(t)
    }

    fn operand(&mut self) -> Result<Operand, QueryError> {
        if let Some(Tok::Name(n)) = self.peek() {
            if is_integer_cast(n) && self.toks.get(self.pos + 1).map(|s| &s.tok) == Some(&Tok::LParen) {
                self.pos += 2;
                let var = match self.next() {
                    Some(Tok::Var(v)) => v,
                    _ => {
                        self.pos -= 1;
                        return Err(self.err("xsd:integer() takes a variable"));
                    }
                };
                self.expect(Tok::RParen, "`)`")?;
                return Ok(Operand::IntegerCast(var));
            }
        }
        match self.term()? {
            PatternTerm::Var(v) => Ok(Operand::Var(v)),
            PatternTerm::Term(t) => Ok(Operand::Const(t)),
        }
    }

    fn filter(&mut self) -> Result<FilterExpr, QueryError> {
        self.expect(Tok::LParen, "`(` after FILTER")?;
        let left = self.operand()?;
        let op = match self.next() {
            Some(Tok::Op(op)) => op,
            _ => {
                self.pos -= 1;
                return Err(self.err("expected a comparison operator"));
            }
        };
        let right = self.operand()?;
        self.expect(Tok::RParen, "`)` closing FILTER")?;
        Ok(FilterExpr { left, op, right })
    }

    fn group(&mut self, nested: bool) -> Result<GroupPattern, QueryError> {
        self.expect(Tok::LBrace, "`{`")?;
        let mut group = GroupPattern::default();
        loop {
            match self.peek() {
                None => return Err(self.err("unclosed `{`")),
                Some(Tok::RBrace) => {
                    self.pos += 1;
                    break;
                }
                Some(Tok::Dot) => self.pos += 1,
                Some(Tok::Word(w)) if w.eq_ignore_ascii_case("FILTER") => {
                    self.pos += 1;
                    group.filters.push(self.filter()?);
                }
                Some(Tok::Word(w)) if w.eq_ignore_ascii_case("MINUS") => {
                    if nested {
                        return Err(QueryError::NestedMinus);
                    }
                    if group.minus.is_some() {
                        return Err(self.err("only one MINUS group is allowed"));
                    }
                    self.pos += 1;
                    group.minus = Some(Box::new(self.group(true)?));
                }
                _ => {
                    let s = self.node_term()?;
                    let p = self.node_term()?;
                    let o = self.term()?;
                    group.triples.push(TriplePattern { subject: s, predicate: p, object: o });
                }
            }
        }
        check_filters(&group)?;
        Ok(group)
    }
}

fn check_filters(group: &GroupPattern) -> Result<(), QueryError> {
    for f in &group.filters {
        let anchored = [&f.left, &f.right]
            .iter()
            .filter_map(|o| o.variable())
            .any(|v| group.binds(v));
        if !anchored {
            return Err(QueryError::FilterWithoutVariable(format!(
                "{:?} {} {:?}",
                f.left,
                f.op.symbol(),
                f.right
            )));
        }
    }
    Ok(())
}

fn describe(tok: &Tok) -> String {
    match tok {
        Tok::LBrace => "`{`".into(),
        Tok::RBrace => "`}`".into(),
        Tok::LParen => "`(`".into(),
        Tok::RParen => "`)`".into(),
        Tok::Dot => "`.`".into(),
        Tok::Op(op) => format!("`{}`", op.symbol()),
        Tok::Word(w) => format!("`{w}`"),
        other => format!("{other:?}"),
    }
}

/// Parses query text. Names resolve against `prefixes` plus any leading
/// `PREFIX p: <IRI>` declarations.
pub fn parse_query(text: &str, prefixes: &BTreeMap<String, String>) -> Result<Query, QueryError> {
    let toks = Lexer::new(text).tokens()?;
    let end = text.lines().enumerate().last().map(|(i, l)| (i + 1, l.chars().count() + 1)).unwrap_or((1, 1));
    let mut p = Parser { toks, pos: 0, prefixes: prefixes.clone(), end };

    while p.keyword("PREFIX") {
        p.pos += 1;
        let name = match p.next() {
            Some(Tok::Name(n)) if n.ends_with(':') => n.trim_end_matches(':').to_owned(),
            _ => {
                p.pos -= 1;
                return Err(p.err("expected `prefix:` after PREFIX"));
            }
        };
        let base = match p.next() {
            Some(Tok::Name(n)) if n.starts_with('<') => n[1..n.len() - 1].to_owned(),
            _ => {
                p.pos -= 1;
                return Err(p.err("expected `<IRI>` in PREFIX"));
            }
        };
        p.prefixes.insert(name, base);
    }

    let query = if p.keyword("ASK") {
        p.pos += 1;
        Query::ask(p.group(false)?)
    } else if p.keyword("SELECT") {
        p.pos += 1;
        let distinct = p.keyword("DISTINCT");
        if distinct {
            p.pos += 1;
        }
        let mut projection = Vec::new();
        while let Some(Tok::Var(v)) = p.peek() {
            projection.push(v.clone());
            p.pos += 1;
        }
        if projection.is_empty() {
            return Err(p.err("SELECT needs at least one variable"));
        }
        if p.keyword("WHERE") {
            p.pos += 1;
        }
        let body = p.group(false)?;
        for v in &projection {
            if !body.binds(v) {
                return Err(QueryError::UnboundProjection(v.clone()));
            }
        }
        Query { form: QueryForm::Select, distinct, projection, body }
    } else {
        return Err(p.err("expected ASK or SELECT"));
    };
    if p.pos < p.toks.len() {
        return Err(p.err("trailing input after query"));
    }
    Ok(query)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kgstore::builtin_prefixes;

    fn prefixes() -> BTreeMap<String, String> {
        let mut p = builtin_prefixes();
        p.insert("dt".into(), vocab::DT.into());
        p
    }

    const PRINTED_ASK: &str = "Ask
{
  ?x dt:hasSlope ?y
  ?y dt:hasArea ?z
  ?z rdf:type dt:Zone1
  ?z dt:hasSituation ?s
  ?s rdf:type dt:Protected
  Minus {
    ?y dt:hasRecovery ?p
    FILTER (xsd:integer(?p) != 70)
  }
}";

    #[test]
    fn printed_slope_ask() {
        let q = parse_query(PRINTED_ASK, &prefixes()).unwrap();
        assert_eq!(q.form, QueryForm::Ask);
        assert_eq!(q.body.triples.len(), 5);
        assert!(q.body.filters.is_empty());
        let minus = q.body.minus.as_ref().unwrap();
        assert_eq!(minus.triples.len(), 1);
        assert_eq!(
            minus.filters,
            vec![FilterExpr {
                left: Operand::IntegerCast("p".into()),
                op: CompareOp::Ne,
                right: Operand::Const(Term::Literal(Literal::integer(70))),
            }]
        );
    }

    #[test]
    fn justification_select() {
        let text = "SELECT DISTINCT ?z WHERE {
  ?x dt:hasSBVR ?y
  ?b dt:hasSBVRrule ?z
  FILTER (?y = ?b)
  FILTER (?x = <http://example.org/regcheck/rules#P70>)
}";
        let q = parse_query(text, &prefixes()).unwrap();
        assert_eq!(q.form, QueryForm::Select);
        assert!(q.distinct);
        assert_eq!(q.projection, vec!["z".to_string()]);
        assert_eq!(q.body.triples.len(), 2);
        assert_eq!(q.body.filters.len(), 2);
    }

    #[test]
    fn single_pattern_ask() {
        let q = parse_query("ASK { ?x rdf:type dt:Tile }", &prefixes()).unwrap();
        assert_eq!(q.body.triples.len(), 1);
        assert!(q.body.filters.is_empty());
        assert!(q.body.minus.is_none());
    }

    #[test]
    fn dots_and_prefix_declarations() {
        let q = parse_query(
            "PREFIX ex: <http://ex/>\nASK { ?x ex:p ?y . ?y ex:q \"v\"^^xsd:string. FILTER(?y >= 1.5) }",
            &BTreeMap::new(),
        )
        .unwrap();
        assert_eq!(q.body.triples.len(), 2);
        assert_eq!(
            q.body.filters[0].right,
            Operand::Const(Term::Literal(Literal::new("1.5", Datatype::Decimal).unwrap()))
        );
    }

    #[test]
    fn comparison_operators_lex() {
        for (text, op) in [("<", CompareOp::Lt), ("<=", CompareOp::Le), (">", CompareOp::Gt), (">=", CompareOp::Ge)] {
            let q = parse_query(&format!("ASK {{ ?x dt:p ?y FILTER(?y {text} 3) }}"), &prefixes()).unwrap();
            assert_eq!(q.body.filters[0].op, op);
            let q = parse_query(&format!("ASK {{ ?x dt:p ?y FILTER(?y{text}3) }}"), &prefixes()).unwrap();
            assert_eq!(q.body.filters[0].op, op);
        }
    }

    #[test]
    fn syntax_errors_report_position() {
        let err = parse_query("ASK {\n  ?x dt:p\n}", &prefixes()).unwrap_err();
        assert!(matches!(err, QueryError::Syntax { line: 3, col: 1, .. }), "{err}");
        let err = parse_query("ASK { ?x nope:p ?y }", &prefixes()).unwrap_err();
        assert!(matches!(err, QueryError::UnknownPrefix { line: 1, col: 10, .. }), "{err}");
        let err = parse_query("ASK { ?x dt:p ?y } extra", &prefixes()).unwrap_err();
        assert!(matches!(err, QueryError::Syntax { .. }));
    }

    #[test]
    fn projection_must_occur_in_body() {
        let err = parse_query("SELECT ?w WHERE { ?x dt:p ?y }", &prefixes()).unwrap_err();
        assert_eq!(err, QueryError::UnboundProjection("w".into()));
    }

    #[test]
    fn nested_minus_and_unanchored_filter_rejected() {
        let err = parse_query("ASK { ?x dt:p ?y MINUS { ?y dt:q ?z MINUS { ?z dt:r ?w } } }", &prefixes()).unwrap_err();
        assert_eq!(err, QueryError::NestedMinus);
        let err = parse_query("ASK { ?x dt:p ?y FILTER(?w = 3) }", &prefixes()).unwrap_err();
        assert!(matches!(err, QueryError::FilterWithoutVariable(_)));
    }

    #[test]
    fn placeholders_must_be_instantiated() {
        let err = parse_query("ASK { ?x dt:p ?y FILTER(?x = {{id}}) }", &prefixes()).unwrap_err();
        assert!(matches!(err, QueryError::Syntax { .. }));
    }

    #[test]
    fn serialization_round_trips() {
        let q = parse_query(PRINTED_ASK, &prefixes()).unwrap();
        assert_eq!(parse_query(&q.to_text(&prefixes()), &prefixes()).unwrap(), q);
        assert_eq!(parse_query(&q.to_string(), &BTreeMap::new()).unwrap(), q);
    }
}
