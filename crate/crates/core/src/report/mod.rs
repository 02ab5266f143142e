//! Noncompliance reports: each violation event is explained by the SBVR
//! sentences the justification base links to the violated rule.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use log::warn;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::kgstore::{Graph, Iri, Term};
use crate::pipeline::{EventKind, ExecutionEvent};
use crate::query::{eval_select, instantiate_template, parse_query};
use crate::rulebase::{rulebase_prefixes, RuleSet};
use crate::vocab;

/// Looks up the justification sentences of the rule bound to
/// `{{idComposant}}`.
pub const JUSTIFICATION_QUERY: &str = "SELECT DISTINCT ?z WHERE {
  ?x dt:hasSBVR ?y
  ?b dt:hasSBVRrule ?z
  FILTER (?y = ?b)
  FILTER (?x = {{idComposant}})
}";

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Finding {
    pub component: Option<Iri>,
    pub rule: Iri,
    pub sbvr_text: String,
    pub source_doc: String,
    pub domain_tag: String,
    pub theme_tag: String,
    pub event_seq: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Compliant,
    Noncompliant,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComplianceReport {
    pub dt_id: String,
    pub verdict: Verdict,
    pub findings: Vec<Finding>,
    pub rules_evaluated: usize,
    pub trace_digest: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Text,
    Json,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Explanation {
    pub findings: Vec<Finding>,
    pub warnings: Vec<String>,
}

/// The justification sentences stored for `rule`, in lexical order.
pub fn justifications(sbvr_base: &Graph, rule: &Iri) -> Vec<String> {
    let params = BTreeMap::from([("idComposant".to_owned(), Term::Iri(rule.clone()))]);
    let prefixes = rulebase_prefixes();
    let text = instantiate_template(JUSTIFICATION_QUERY, &params, &prefixes).expect("template instantiates with an IRI");
    let query = parse_query(&text, &prefixes).expect("instantiated template parses");
    eval_select(sbvr_base, &query)
        .expect("template is a SELECT")
        .into_iter()
        .filter_map(|row| row.get("z").and_then(Term::as_literal).map(|l| l.lexical().to_owned()))
        .collect()
}

/// One finding per violation event and justification sentence. A violated
/// rule without a justification still yields a finding, with placeholder
/// text and a warning.
pub fn explain(trace: &[ExecutionEvent], sbvr_base: &Graph, rules: &RuleSet) -> Explanation {
    let mut out = Explanation::default();
    let mut cache: BTreeMap<&Iri, Vec<String>> = BTreeMap::new();
    for event in trace.iter().filter(|e| e.kind == EventKind::ViolationDetected) {
        let texts = cache.entry(&event.subject).or_insert_with(|| justifications(sbvr_base, &event.subject));
        let meta = rules.get(&event.subject).map(|r| r.metadata()).unwrap_or_default();
        let placeholder = [format!("no justification on record for {}", event.subject)];
        let texts: &[String] = if texts.is_empty() {
            let message = format!("rule {} has no SBVR justification", event.subject);
            warn!("{message}");
            if !out.warnings.contains(&message) {
                out.warnings.push(message);
            }
            &placeholder
        } else {
            texts
        };
        for text in texts {
            out.findings.push(Finding {
                component: event.component.clone(),
                rule: event.subject.clone(),
                sbvr_text: text.clone(),
                source_doc: meta.source_doc.clone(),
                domain_tag: meta.domain_tag.clone(),
                theme_tag: meta.theme_tag.clone(),
                event_seq: event.seq,
            });
        }
    }
    out
}

/// Hex SHA-256 of the trace's canonical event lines.
pub fn trace_digest(trace: &[ExecutionEvent]) -> String {
    let mut hasher = Sha256::new();
    for event in trace {
        hasher.update(event.to_string().as_bytes());
        hasher.update(b"\n");
    }
    hex::encode(hasher.finalize())
}

pub fn build_report(dt_id: &str, trace: &[ExecutionEvent], mut findings: Vec<Finding>) -> ComplianceReport {
    let violated = trace.iter().any(|e| e.kind == EventKind::ViolationDetected);
    findings.sort();
    ComplianceReport {
        dt_id: dt_id.to_owned(),
        verdict: if violated { Verdict::Noncompliant } else { Verdict::Compliant },
        findings,
        rules_evaluated: trace.iter().filter(|e| e.kind == EventKind::RuleEvaluated).count(),
        trace_digest: trace_digest(trace),
    }
}

#[derive(Serialize)]
struct JsonFinding<'a> {
    component: &'a str,
    rule: &'a str,
    source: &'a str,
    domain: &'a str,
    theme: &'a str,
    sbvr: &'a str,
    event_seq: u64,
}

#[derive(Serialize)]
struct JsonReport<'a> {
    dt: &'a str,
    verdict: Verdict,
    rules_evaluated: usize,
    findings: Vec<JsonFinding<'a>>,
    trace_digest: &'a str,
}

fn component_name(f: &Finding) -> &str {
    f.component.as_ref().map_or("", Iri::as_str)
}

pub fn render_report(report: &ComplianceReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::Json => {
            let json = JsonReport {
                dt: &report.dt_id,
                verdict: report.verdict,
                rules_evaluated: report.rules_evaluated,
                findings: report
                    .findings
                    .iter()
                    .map(|f| JsonFinding {
                        component: component_name(f),
                        rule: f.rule.as_str(),
                        source: &f.source_doc,
                        domain: &f.domain_tag,
                        theme: &f.theme_tag,
                        sbvr: &f.sbvr_text,
                        event_seq: f.event_seq,
                    })
                    .collect(),
                trace_digest: &report.trace_digest,
            };
            serde_json::to_string(&json).expect("report serializes") + "\n"
        }
        ReportFormat::Text => render_text(report),
    }
}

fn render_text(report: &ComplianceReport) -> String {
    let mut violations: Vec<u64> = report.findings.iter().map(|f| f.event_seq).collect();
    violations.sort_unstable();
    violations.dedup();
    let n = violations.len();
    let mut out = String::new();
    let head = match report.verdict {
        Verdict::Compliant => "COMPLIANT",
        Verdict::Noncompliant => "NONCOMPLIANT",
    };
    let _ = writeln!(
        out,
        "{head} — {} rules evaluated, {n} violation{}",
        report.rules_evaluated,
        if n == 1 { "" } else { "s" }
    );
    let _ = writeln!(out, "technical document: {}", report.dt_id);
    let _ = writeln!(out, "trace digest: {}", report.trace_digest);
    for (i, f) in report.findings.iter().enumerate() {
        let _ = writeln!(out);
        let _ = writeln!(out, "[{}] component: {}", i + 1, f.component.as_ref().map_or("(none)", Iri::as_str));
        let _ = writeln!(out, "    rule:      {}", f.rule);
        let _ = writeln!(out, "    source:    {}", f.source_doc);
        let _ = writeln!(out, "    domain:    {}", f.domain_tag);
        let _ = writeln!(out, "    theme:     {}", f.theme_tag);
        let _ = writeln!(out, "    event:     #{}", f.event_seq);
        let _ = writeln!(out, "    why:       {}", f.sbvr_text);
    }
    out
}

/// Warnings for rules linked to several SBVR nodes and nodes carrying
/// several sentences: each justification should answer exactly one rule.
pub fn check_sbvr_base(sbvr_base: &Graph) -> Vec<String> {
    let mut warnings = Vec::new();
    for (predicate, what) in [(vocab::DT_HAS_SBVR, "SBVR nodes"), (vocab::DT_HAS_SBVR_RULE, "SBVR sentences")] {
        let mut counts: BTreeMap<&Iri, usize> = BTreeMap::new();
        for t in sbvr_base.with_predicate(predicate) {
            *counts.entry(&t.subject).or_default() += 1;
        }
        for (subject, n) in counts.into_iter().filter(|(_, n)| *n > 1) {
            warnings.push(format!("{subject} has {n} {what}"));
        }
    }
    warnings
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kgstore::parse_graph;

    const P70_BASE: &str = "@prefix dt: <http://example.org/ontodt#> .
@prefix rules: <http://example.org/regcheck/rules#> .
@prefix sbvr: <http://example.org/regcheck/sbvr#> .
rules:P70 dt:hasSBVR sbvr:P70 .
sbvr:P70 dt:hasSBVRrule \"If a till is build in Zone 1 and has situation equal to protected and has recovery equal to 8 cm then it has slope equal to 70%\" .
";

    fn iri(s: &str) -> Iri {
        Iri::new(s).unwrap()
    }

    fn violation(seq: u64, rule: &str) -> ExecutionEvent {
        ExecutionEvent {
            seq,
            kind: EventKind::ViolationDetected,
            subject: iri(&format!("{}{rule}", vocab::RULES)),
            component: Some(iri(&vocab::dt("t1"))),
            detail: String::new(),
        }
    }

    fn evaluated(seq: u64) -> ExecutionEvent {
        ExecutionEvent { kind: EventKind::RuleEvaluated, component: None, ..violation(seq, "P70") }
    }

    #[test]
    fn violation_is_explained_by_stored_sentence() {
        let base = parse_graph(P70_BASE).unwrap();
        let out = explain(&[evaluated(1), violation(2, "P70")], &base, &RuleSet::default());
        assert_eq!(out.findings.len(), 1);
        assert_eq!(
            out.findings[0].sbvr_text,
            "If a till is build in Zone 1 and has situation equal to protected and has recovery equal to 8 cm then it has slope equal to 70%"
        );
        assert_eq!(out.findings[0].event_seq, 2);
        assert!(out.warnings.is_empty());
    }

    #[test]
    fn empty_trace_explains_nothing() {
        assert_eq!(explain(&[], &Graph::new(), &RuleSet::default()), Explanation::default());
    }

    #[test]
    fn unknown_rule_gets_placeholder() {
        let base = parse_graph(P70_BASE).unwrap();
        let out = explain(&[violation(1, "P80")], &base, &RuleSet::default());
        assert_eq!(out.findings.len(), 1);
        assert_eq!(out.findings[0].sbvr_text, format!("no justification on record for {}P80", vocab::RULES));
        assert_eq!(out.warnings.len(), 1);
    }

    #[test]
    fn verdict_and_counts() {
        let base = parse_graph(P70_BASE).unwrap();
        let trace = vec![evaluated(1), violation(2, "P70"), evaluated(3)];
        let findings = explain(&trace, &base, &RuleSet::default()).findings;
        let report = build_report("dt", &trace, findings);
        assert_eq!(report.verdict, Verdict::Noncompliant);
        assert_eq!(report.rules_evaluated, 2);
        assert_eq!(report.trace_digest, build_report("dt", &trace, vec![]).trace_digest);
        let text = render_report(&report, ReportFormat::Text);
        assert!(text.starts_with("NONCOMPLIANT — 2 rules evaluated, 1 violation\n"));
        assert!(text.contains("then it has slope equal to 70%"));

        let compliant = build_report("dt", &[evaluated(1)], vec![]);
        assert!(render_report(&compliant, ReportFormat::Text).starts_with("COMPLIANT — 1 rules evaluated, 0 violations"));
    }

    #[test]
    fn json_schema_field_order() {
        let report = build_report("dt1", &[], vec![]);
        let json = render_report(&report, ReportFormat::Json);
        assert_eq!(
            json,
            format!(
                "{{\"dt\":\"dt1\",\"verdict\":\"compliant\",\"rules_evaluated\":0,\"findings\":[],\"trace_digest\":\"{}\"}}\n",
                report.trace_digest
            )
        );
    }

    #[test]
    fn duplicate_justifications_warned() {
        let mut text = P70_BASE.to_owned();
        text.push_str("rules:P70 dt:hasSBVR sbvr:P70b .\n");
        let warnings = check_sbvr_base(&parse_graph(&text).unwrap());
        assert_eq!(warnings.len(), 1);
        assert!(check_sbvr_base(&parse_graph(P70_BASE).unwrap()).is_empty());
    }
}
