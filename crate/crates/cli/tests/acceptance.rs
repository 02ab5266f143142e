//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::rngs::StdRng;
use rand::SeedableRng;
use regcheck::{run, EXIT_ERROR, EXIT_FAIL, EXIT_OK};
use regcheck_core::kgstore::{infer_closure, parse_graph, Graph, Iri, Term, Triple};
use regcheck_core::ontology::{merge_intersection, reduce_edges, transitive_reduction, Ontology, OntologyError};
use regcheck_core::pipeline::{compose_complex, parse_pipeline, EventKind, ExecutionContext, ProcessKind};
use regcheck_core::query::{eval_ask, eval_select, QueryForm};
use regcheck_core::rulebase::load_rulebase;
use regcheck_core::text::canonical_label;
use regcheck_core::vocab;

use common::*;

type Outcome = Result<String, String>;

fn fixture(name: &str) -> PathBuf {
    [env!("CARGO_MANIFEST_DIR"), "..", "..", "fixtures", name].iter().collect()
}

fn text(path: &Path) -> String {
    path.to_string_lossy().into_owned()
}

fn regcheck(args: &[String]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = run(std::iter::once("regcheck".to_owned()).chain(args.iter().cloned()), &mut out, &mut err);
    (code, String::from_utf8_lossy(&out).into_owned(), String::from_utf8_lossy(&err).into_owned())
}

fn check_args(dt: &Path, pipeline: &Path) -> Vec<String> {
    let mut args: Vec<String> = vec!["check".into(), "--dt".into(), text(dt)];
    args.extend(["--ontology".into(), text(&fixture("ontodt.trp"))]);
    args.extend(["--rules".into(), text(&fixture("tile.rb.txt"))]);
    args.extend(["--sbvr-base".into(), text(&fixture("tile.sbvr.trp"))]);
    args.extend(["--pipeline".into(), text(pipeline)]);
    args
}

fn ensure(cond: bool, message: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(message())
    }
}

/// One table cell, read straight from the fixture text.
struct Cell {
    slope: u32,
    zone: usize,
    situation: &'static str,
    minimum: u32,
}

impl Cell {
    fn rule_local(&self) -> String {
        format!("P{}_Z{}_{}", self.slope, ["I", "II", "III"][self.zone - 1], self.situation.to_lowercase())
    }
}

fn table_cells() -> Vec<Cell> {
    let raw = fs::read_to_string(fixture("slope_table.csv")).unwrap();
    let mut lines = raw.lines().filter(|l| !l.starts_with('#') && !l.trim().is_empty());
    let header: Vec<(usize, &'static str)> = lines
        .next()
        .unwrap()
        .split(';')
        .skip(1)
        .map(|h| {
            let words: Vec<&str> = h.split_whitespace().collect();
            let zone = match words[1] {
                "I" => 1,
                "II" => 2,
                _ => 3,
            };
            let situation = match words[2] {
                "Plat" => "Protected",
                "Normal" => "Normal",
                _ => "Exposed",
            };
            (zone, situation)
        })
        .collect();
    let number = |s: &str| s.trim().trim_end_matches(['%', 'm', 'c']).trim().parse::<u32>().unwrap();
    let mut cells = Vec::new();
    for line in lines {
        let fields: Vec<&str> = line.split(';').collect();
        let slope = number(fields[0]);
        for (&(zone, situation), field) in header.iter().zip(&fields[1..]) {
            cells.push(Cell { slope, zone, situation, minimum: number(field) });
        }
    }
    cells
}

fn one_tile(slope: u32, zone: usize, situation: &str, recovery: u32) -> String {
    format!(
        "@prefix dt: <http://example.org/ontodt#> .
dt:tile1 rdf:type dt:Tile .
dt:tile1 dt:hasSlope \"{slope}\"^^integer .
dt:tile1 dt:hasRecovery \"{recovery}\"^^integer .
dt:tile1 dt:hasArea dt:site1 .
dt:site1 rdf:type dt:Zone{zone} .
dt:site1 dt:hasSituation dt:situation1 .
dt:situation1 rdf:type dt:{situation} .
"
    )
}

struct SweepCase {
    cell_rule: String,
    noncompliant: bool,
    code: i32,
    report: serde_json::Value,
}

fn sweep() -> Result<(Vec<SweepCase>, Duration), String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let cells = table_cells();
    ensure(cells.len() == 88, || format!("fixture has {} cells", cells.len()))?;
    let started = Instant::now();
    let mut cases = Vec::new();
    for cell in &cells {
        for recovery in 5..=10 {
            let dt = dir.path().join("dt.trp");
            fs::write(&dt, one_tile(cell.slope, cell.zone, cell.situation, recovery)).map_err(|e| e.to_string())?;
            let mut args = check_args(&dt, &fixture("pipeline.trp"));
            args.extend(["--format".into(), "json".into()]);
            let (code, out, err) = regcheck(&args);
            ensure(code != EXIT_ERROR, || format!("{}: {err}", cell.rule_local()))?;
            let report = serde_json::from_str(&out).map_err(|e| format!("{}: {e}", cell.rule_local()))?;
            cases.push(SweepCase { cell_rule: cell.rule_local(), noncompliant: recovery < cell.minimum, code, report });
        }
    }
    Ok((cases, started.elapsed()))
}

fn table_sweep(cases: &[SweepCase], elapsed: Duration) -> Outcome {
    let mut agree = 0;
    for case in cases {
        let expected = if case.noncompliant { EXIT_FAIL } else { EXIT_OK };
        let verdict = if case.noncompliant { "noncompliant" } else { "compliant" };
        if case.code == expected && case.report["verdict"] == verdict {
            agree += 1;
        }
    }
    ensure(agree == 528 && cases.len() == 528, || format!("{agree}/{} cases agree", cases.len()))?;
    ensure(elapsed < Duration::from_secs(30), || format!("took {elapsed:.1?}"))?;
    Ok(format!("528/528 verdicts match the lookup in {elapsed:.1?}"))
}

fn faithfulness(cases: &[SweepCase]) -> Outcome {
    let stored = parse_graph(&fs::read_to_string(fixture("tile.sbvr.trp")).unwrap()).unwrap();
    let sentences_of = |local: &str| -> BTreeSet<String> {
        let rule = Iri::new(format!("{}{local}", vocab::RULES)).unwrap();
        stored
            .objects(&rule, vocab::DT_HAS_SBVR)
            .into_iter()
            .filter_map(Term::as_iri)
            .flat_map(|node| stored.objects(node, vocab::DT_HAS_SBVR_RULE))
            .filter_map(|t| match t {
                Term::Literal(l) => Some(l.lexical().to_owned()),
                _ => None,
            })
            .collect()
    };
    let mut checked = 0;
    for case in cases.iter().filter(|c| c.noncompliant) {
        ensure(case.code == EXIT_FAIL, || format!("{}: exit {}", case.cell_rule, case.code))?;
        let findings = case.report["findings"].as_array().cloned().unwrap_or_default();
        let rules: BTreeSet<String> =
            findings.iter().map(|f| f["rule"].as_str().unwrap_or("").rsplit('#').next().unwrap().to_owned()).collect();
        let sentences: BTreeSet<String> = findings.iter().map(|f| f["sbvr"].as_str().unwrap_or("").to_owned()).collect();
        let expected = sentences_of(&case.cell_rule);
        ensure(rules == BTreeSet::from([case.cell_rule.clone()]), || format!("{}: rules {rules:?}", case.cell_rule))?;
        ensure(!expected.is_empty() && sentences == expected, || {
            format!("{}: sentences {sentences:?}, stored {expected:?}", case.cell_rule)
        })?;
        checked += 1;
    }
    ensure(checked > 0, || "no noncompliant case".into())?;
    Ok(format!("{checked} noncompliant reports carry exactly the stored sentences, exit 1"))
}

fn query_oracle() -> Outcome {
    let mut rng = StdRng::seed_from_u64(0x5eed);
    let (mut cases, mut positive) = (0, 0);
    for _ in 0..1500 {
        let graph = random_graph(&mut rng, 30);
        let query = random_query(&mut rng);
        let agrees = match query.form {
            QueryForm::Ask => {
                let answer = eval_ask(&graph, &query).map_err(|e| e.to_string())?;
                positive += answer as usize;
                answer == oracle_ask(&graph, &query)
            }
            QueryForm::Select => {
                let mut rows = eval_select(&graph, &query).map_err(|e| e.to_string())?;
                rows.sort();
                positive += !rows.is_empty() as usize;
                rows == oracle_select(&graph, &query)
            }
        };
        ensure(agrees, || format!("disagreement on {query} over\n{graph:?}"))?;
        cases += 1;
    }
    ensure(positive * 10 >= cases, || format!("only {positive}/{cases} cases have answers"))?;
    Ok(format!("{cases}/{cases} random cases agree ({positive} with answers)"))
}

fn closure_of(edges: &BTreeSet<(Iri, Iri)>) -> BTreeSet<Triple> {
    let g: Graph = edges
        .iter()
        .map(|(a, b)| Triple::new(a.clone(), Iri::new(vocab::RDFS_SUBCLASS_OF).unwrap(), b.clone()))
        .collect();
    infer_closure(&g).iter().cloned().collect()
}

fn reduction_duality() -> Outcome {
    let mut rng = StdRng::seed_from_u64(0xda9);
    for i in 0..250 {
        let (n, edges) = random_dag(&mut rng, 15);
        let iri_edges: BTreeSet<(Iri, Iri)> = edges.iter().map(|&(a, b)| (node(a), node(b))).collect();
        let reduced = reduce_edges(&iri_edges).map_err(|cycle| format!("dag {i}: cycle {cycle:?}"))?;
        let full = closure_of(&iri_edges);
        ensure(closure_of(&reduced) == full, || format!("dag {i}: closures differ"))?;
        let expected: BTreeSet<(Iri, Iri)> = naive_reduction(n, &edges).iter().map(|&(a, b)| (node(a), node(b))).collect();
        ensure(reduced == expected, || format!("dag {i}: reduction is not the minimal one"))?;
        for e in &reduced {
            let mut fewer = reduced.clone();
            fewer.remove(e);
            ensure(closure_of(&fewer) != full, || format!("dag {i}: edge {e:?} is redundant"))?;
        }
        let g: Graph = full.iter().cloned().collect();
        let closed: BTreeSet<Triple> = infer_closure(&g).iter().cloned().collect();
        ensure(closed == full, || format!("dag {i}: closure is not idempotent"))?;
    }
    for name in ["ontodt.trp", "dt_panel.trp", "chain.trp", "reef_sample.trp"] {
        let g = infer_closure(&parse_graph(&fs::read_to_string(fixture(name)).unwrap()).unwrap());
        ensure(infer_closure(&g) == g, || format!("{name}: closure is not idempotent"))?;
    }
    Ok("250 DAGs reduce to the minimal equivalent; closure idempotent".into())
}

fn ontology(name: &str) -> Ontology {
    Ontology::from_graph(&parse_graph(&fs::read_to_string(fixture(name)).unwrap()).unwrap()).unwrap()
}

fn merge_contract() -> Outcome {
    let (reef, dt) = (ontology("reef_sample.trp"), ontology("dt_sample.trp"));
    let merged = merge_intersection(&reef, &dt).map_err(|e| e.to_string())?.ontology;
    ensure(merged.concepts == dt.concepts, || "concepts differ from the document ontology".into())?;
    let expected: BTreeSet<(Iri, Iri)> = dt
        .concepts
        .iter()
        .flat_map(|d| {
            reef.concepts
                .iter()
                .filter(|r| canonical_label(reef.label_of(r)) == canonical_label(dt.label_of(d)))
                .map(move |r| (d.clone(), r.clone()))
        })
        .collect();
    let got: BTreeSet<(Iri, Iri)> = merged.alignments.clone().into_iter().collect();
    ensure(got == expected && !expected.is_empty(), || format!("alignments {got:?}, expected {expected:?}"))?;
    for o in [&reef, &dt] {
        let same = merge_intersection(o, o).map_err(|e| e.to_string())?.ontology;
        ensure(same.concepts == o.concepts && same.labels == o.labels && same.subclass_edges == transitive_reduction(o).map_err(|e| e.to_string())?.subclass_edges, || {
            "merge(O, O) differs from O".into()
        })?;
    }
    let adversarial_reef = parse_graph(
        "@prefix owl: <http://www.w3.org/2002/07/owl#> .
@prefix reef: <http://www.cstb.fr/reef/#> .
reef:1 rdfs:label \"tuile\" .
reef:1 rdf:type owl:Class .
reef:2 rdfs:label \"couverture\" .
reef:2 rdf:type owl:Class .
reef:1 rdfs:subClassOf reef:2 .
",
    )
    .unwrap();
    let adversarial_dt = parse_graph(
        "@prefix dt: <http://example.org/ontodt#> .
dt:Tile rdfs:label \"Tuile\" .
dt:Roof rdfs:label \"Couverture\" .
dt:Roof rdfs:subClassOf dt:Tile .
",
    )
    .unwrap();
    let cyclic = merge_intersection(
        &Ontology::from_graph(&adversarial_reef).unwrap(),
        &Ontology::from_graph(&adversarial_dt).unwrap(),
    );
    ensure(matches!(cyclic, Err(OntologyError::MergeCycle(_))), || format!("cycle not detected: {cyclic:?}"))?;
    Ok(format!("{} alignments, self-merge identity, cycle detected", got.len()))
}

fn composition() -> Outcome {
    let pipeline_graph = parse_graph(&fs::read_to_string(fixture("pipeline.trp")).unwrap()).unwrap();
    let mut registry = parse_pipeline(&pipeline_graph).map_err(|e| e.to_string())?;
    let onto = ontology("ontodt.trp");
    let concept = Iri::new(vocab::dt("VerrePolymere")).unwrap();
    let node = compose_complex(&mut registry, &onto, &concept).map_err(|e| e.to_string())?;
    let ProcessKind::Pipeline(body) = &node.kind else { return Err("composed node is not a pipeline".into()) };
    let targets: Vec<Iri> = body
        .iter()
        .filter_map(|s| match &s.kind {
            ProcessKind::Pipe(t) => Some(t.clone()),
            _ => None,
        })
        .collect();
    let names: BTreeSet<&str> = targets.iter().map(|t| t.local_name()).collect();
    ensure(targets.len() == 3 && body.len() == 3, || format!("{} steps", body.len()))?;
    ensure(names == BTreeSet::from(["photovoltaicCell", "polymerGlass", "tile"]), || format!("pipes to {names:?}"))?;
    ensure(targets.iter().all(|t| registry.is_elementary(t)), || "a pipe is not elementary".into())?;

    let rules = load_rulebase(&fs::read_to_string(fixture("tile.rb.txt")).unwrap(), None).map_err(|e| e.to_string())?;
    let mut graph = parse_graph(&fs::read_to_string(fixture("ontodt.trp")).unwrap()).unwrap();
    graph.extend_from(&parse_graph(&fs::read_to_string(fixture("dt_panel.trp")).unwrap()).unwrap());
    let resources = [("ontodt.trp".to_owned(), parse_graph(&fs::read_to_string(fixture("ontodt.trp")).unwrap()).unwrap())];
    let mut ctx = ExecutionContext::new(infer_closure(&graph), &registry, &rules).with_resources(resources.into());
    ctx.run(&node).map_err(|e| e.to_string())?;
    for t in &targets {
        ensure(ctx.trace().iter().any(|e| e.kind == EventKind::ProcessEnter && &e.subject == t), || format!("{t} did not run"))?;
    }

    let bound = 7;
    let mut args = check_args(&fixture("dt_compliant.trp"), &fixture("self_loop.trp"));
    args.extend(["--max-depth".into(), bound.to_string()]);
    let (code, _, err) = regcheck(&args);
    ensure(code == EXIT_ERROR && err.contains(&format!("maximum process depth {bound} exceeded")), || {
        format!("self loop: exit {code}, {err}")
    })?;
    Ok(format!("3 elementary pipes ran; self loop stopped at depth {bound}"))
}

fn determinism() -> Outcome {
    let mut reports = Vec::new();
    for format in ["json", "text"] {
        let runs: Vec<(i32, String)> = (0..2)
            .map(|_| {
                let mut args = check_args(&fixture("dt_noncompliant.trp"), &fixture("pipeline.trp"));
                args.extend(["--format".into(), format.into()]);
                let (code, out, _) = regcheck(&args);
                (code, out)
            })
            .collect();
        ensure(runs[0] == runs[1], || format!("{format} reports differ"))?;
        reports.push(runs[0].1.clone());
    }
    let digest = serde_json::from_str::<serde_json::Value>(&reports[0]).map_err(|e| e.to_string())?["trace_digest"]
        .as_str()
        .unwrap_or_default()
        .to_owned();
    ensure(digest.len() == 64 && reports[1].contains(&digest), || "trace digests differ".into())?;
    Ok(format!("byte-identical reports, digest {}", &digest[..12]))
}

fn main() -> ExitCode {
    let mut failed = 0;
    let mut report = |name: &str, outcome: Outcome| match outcome {
        Ok(detail) => println!("PASS  {name}: {detail}"),
        Err(detail) => {
            failed += 1;
            println!("FAIL  {name}: {detail}");
        }
    };
    match sweep() {
        Ok((cases, elapsed)) => {
            report("table oracle sweep", table_sweep(&cases, elapsed));
            report("explanation faithfulness", faithfulness(&cases));
        }
        Err(e) => {
            report("table oracle sweep", Err(e.clone()));
            report("explanation faithfulness", Err(e));
        }
    }
    report("query engine oracle equivalence", query_oracle());
    report("inference and reduction duality", reduction_duality());
    report("merge contract", merge_contract());
    report("recursive composition", composition());
    report("determinism", determinism());
    if failed == 0 {
        println!("all acceptance criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("{failed} acceptance criteria failed");
        ExitCode::FAILURE
    }
}
