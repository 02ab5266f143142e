use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Result};
use clap::{Args, ValueEnum};
use log::debug;
use regcheck_core::kgstore::{builtin_prefixes, close_in_place, Graph, Iri};
use regcheck_core::ontology::Ontology;
use regcheck_core::pipeline::{
    compose_complex, parse_pipeline, ExecutionContext, ProcessNode, ProcessRegistry, ViolationCollector,
    DEFAULT_MAX_DEPTH,
};
use regcheck_core::report::{build_report, check_sbvr_base, explain, render_report, ReportFormat, Verdict};
use regcheck_core::rulebase::{load_rulebase, rulebase_prefixes, serialize_sbvr_base, MetadataFilter, RuleSet, SpanVocabulary};

use crate::fsio::{load_graph, read_text, write_atomic};
use crate::names::resolve_iri;
use crate::{Io, EXIT_FAIL, EXIT_OK};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReportFormatArg {
    Text,
    Json,
}

#[derive(Debug, Clone, Args)]
pub struct CheckConfig {
    /// Technical document graph (.trp).
    #[arg(long = "dt")]
    pub dt_path: PathBuf,
    /// Ontology graph (.trp); repeatable.
    #[arg(long = "ontology")]
    pub ontology_paths: Vec<PathBuf>,
    /// Rulebase (.rb.txt).
    #[arg(long = "rules")]
    pub rulebase_path: PathBuf,
    /// Process description (.trp). Load/Update resources resolve relative to
    /// its directory.
    #[arg(long = "pipeline")]
    pub pipeline_path: PathBuf,
    /// Run the process composed for this concept instead of the root
    /// pipelines.
    #[arg(long = "compose", value_name = "CONCEPT-IRI")]
    pub compose: Option<String>,
    /// SBVR justification base (.trp); defaults to the rulebase's own.
    #[arg(long = "sbvr-base")]
    pub sbvr_base_path: Option<PathBuf>,
    #[arg(long = "format", value_enum, default_value = "text")]
    pub report_format: ReportFormatArg,
    /// Report file; standard output when absent.
    #[arg(long = "out")]
    pub report_path: Option<PathBuf>,
    #[arg(long, env = "REGCHECK_MAX_DEPTH", default_value_t = DEFAULT_MAX_DEPTH)]
    pub max_depth: usize,
    /// Check table values as exact equalities instead of minimums.
    #[arg(long)]
    pub strict_equality: bool,
    #[arg(long)]
    pub filter_source: Option<String>,
    #[arg(long)]
    pub filter_domain: Option<String>,
    #[arg(long)]
    pub filter_theme: Option<String>,
}

struct Inputs {
    graph: Graph,
    ontology: Ontology,
    rules: RuleSet,
    registry: ProcessRegistry,
    resources: BTreeMap<String, Graph>,
    sbvr_base: Graph,
    compose: Option<Iri>,
}

fn note<T>(problems: &mut Vec<String>, result: Result<T>) -> Option<T> {
    result.map_err(|e| problems.push(e.to_string())).ok()
}

/// Loads and validates every input, reporting all failures at once.
fn preflight(cfg: &CheckConfig, io: &mut Io<'_>) -> Result<Inputs> {
    let mut problems = Vec::new();
    if cfg.max_depth == 0 {
        problems.push("--max-depth must be at least 1".to_owned());
    }
    let dt = note(&mut problems, load_graph(&cfg.dt_path));

    let mut onto_graph = Graph::new();
    let mut onto_ok = true;
    for path in &cfg.ontology_paths {
        match load_graph(path) {
            Ok(g) => onto_graph.extend_from(&g),
            Err(e) => {
                problems.push(e.to_string());
                onto_ok = false;
            }
        }
    }
    let ontology = if onto_ok {
        note(&mut problems, Ontology::from_graph(&onto_graph).map_err(|e| anyhow!("ontology: {e}")))
    } else {
        None
    };
    let vocabulary = ontology.as_ref().filter(|_| !cfg.ontology_paths.is_empty()).map(SpanVocabulary::from_ontology);

    let rules = note(
        &mut problems,
        read_text(&cfg.rulebase_path).and_then(|text| {
            load_rulebase(&text, vocabulary.as_ref()).map_err(|e| anyhow!("{}: {e}", cfg.rulebase_path.display()))
        }),
    );

    let pipeline_graph = note(&mut problems, load_graph(&cfg.pipeline_path));
    let registry = pipeline_graph.as_ref().and_then(|g| {
        note(&mut problems, parse_pipeline(g).map_err(|e| anyhow!("{}: {e}", cfg.pipeline_path.display())))
    });
    let mut resources = BTreeMap::new();
    if let Some(registry) = &registry {
        let base = cfg.pipeline_path.parent().unwrap_or(Path::new("."));
        let names: BTreeSet<&str> = registry.iter().flat_map(ProcessNode::resources).collect();
        for name in names {
            if let Some(g) = note(&mut problems, load_graph(&base.join(name))) {
                resources.insert(name.to_owned(), g);
            }
        }
    }

    let sbvr_base = match &cfg.sbvr_base_path {
        Some(path) => note(&mut problems, load_graph(path)),
        None => rules.as_ref().map(|r| serialize_sbvr_base(&r.rules)),
    };

    let compose = cfg.compose.as_ref().and_then(|text| {
        let mut prefixes = builtin_prefixes();
        prefixes.extend(rulebase_prefixes());
        prefixes.extend(onto_graph.prefixes().clone());
        if let Some(g) = &pipeline_graph {
            prefixes.extend(g.prefixes().clone());
        }
        note(&mut problems, resolve_iri(text, &prefixes).map_err(|e| anyhow!("--compose: {e}")))
    });

    if !problems.is_empty() {
        bail!(problems.join("\n"));
    }
    let (Some(dt), Some(ontology), Some(rules), Some(registry), Some(sbvr_base)) = (dt, ontology, rules, registry, sbvr_base)
    else {
        unreachable!("every missing input was reported");
    };
    for w in rules.warnings.iter().chain(&check_sbvr_base(&sbvr_base)) {
        io.warn(w);
    }
    let mut graph = onto_graph;
    graph.extend_from(&dt);
    close_in_place(&mut graph);
    Ok(Inputs { graph, ontology, rules, registry, resources, sbvr_base, compose })
}

fn dt_id(path: &Path) -> String {
    path.file_name().map_or_else(|| path.display().to_string(), |n| n.to_string_lossy().into_owned())
}

pub fn cmd_check(cfg: &CheckConfig, io: &mut Io<'_>) -> Result<i32> {
    let Inputs { graph, ontology, rules, mut registry, resources, sbvr_base, compose } = preflight(cfg, io)?;

    let filter = MetadataFilter {
        source: cfg.filter_source.clone(),
        domain: cfg.filter_domain.clone(),
        theme: cfg.filter_theme.clone(),
    };
    let rules = if cfg.strict_equality { rules.strict() } else { rules };
    let disabled: BTreeSet<Iri> = rules.rules.iter().filter(|r| !filter.accepts(r)).map(|r| r.id.clone()).collect();
    debug!("{} of {} rules filtered out", disabled.len(), rules.rules.len());

    let roots: Vec<ProcessNode> = match &compose {
        Some(concept) => vec![compose_complex(&mut registry, &ontology, concept)?],
        None => {
            let roots: Vec<ProcessNode> = registry.roots().into_iter().filter_map(|id| registry.get(id).cloned()).collect();
            if roots.is_empty() {
                bail!("{}: no root process; name a concept with --compose", cfg.pipeline_path.display());
            }
            roots
        }
    };

    let mut collector = ViolationCollector::default();
    let trace = {
        let mut ctx = ExecutionContext::new(graph, &registry, &rules)
            .with_max_depth(cfg.max_depth)
            .with_resources(resources)
            .with_disabled_rules(disabled);
        ctx.register_listener(&mut collector)?;
        for root in &roots {
            ctx.run(root)?;
        }
        ctx.trace().to_vec()
    };
    debug!("{} violations collected", collector.violations.len());

    let explanation = explain(&trace, &sbvr_base, &rules);
    for w in &explanation.warnings {
        io.warn(w);
    }
    let report = build_report(&dt_id(&cfg.dt_path), &trace, explanation.findings);
    let format = match cfg.report_format {
        ReportFormatArg::Text => ReportFormat::Text,
        ReportFormatArg::Json => ReportFormat::Json,
    };
    let rendered = render_report(&report, format);
    match &cfg.report_path {
        Some(path) => write_atomic(path, &rendered)?,
        None => io.out.write_all(rendered.as_bytes())?,
    }
    Ok(if report.verdict == Verdict::Compliant { EXIT_OK } else { EXIT_FAIL })
}
