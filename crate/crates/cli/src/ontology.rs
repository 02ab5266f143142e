use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Result};
use clap::Subcommand;
use regcheck_core::kgstore::{builtin_prefixes, close_in_place, serialize_graph, Graph, Iri, Term};
use regcheck_core::ontology::{
    classify_instance, import_thesaurus, merge_intersection, parse_thesaurus, transitive_reduction, MergeWarning,
    Ontology,
};
use regcheck_core::vocab;

use crate::fsio::{load_graph, read_text, write_atomic};
use crate::names::resolve_iri;
use crate::{Io, EXIT_OK};

#[derive(Debug, Clone, Subcommand)]
pub enum OntologyCommand {
    /// Lift a thesaurus (.thes) into a concept hierarchy.
    ImportThesaurus {
        input: PathBuf,
        /// Namespace of the minted concept IRIs.
        #[arg(long, default_value = vocab::REEF)]
        base: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Remove subclass edges implied by others.
    Reduce {
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Intersection merge of a thesaurus ontology into a document ontology.
    Merge {
        #[arg(long)]
        reef: PathBuf,
        #[arg(long)]
        dt: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Test instances against the ontology's concept definitions.
    Classify {
        /// Ontology with concept definitions; repeatable.
        #[arg(long = "ontology", required = true)]
        ontology: Vec<PathBuf>,
        /// Instance data; repeatable.
        #[arg(long = "graph", required = true)]
        graph: Vec<PathBuf>,
        /// Instances to test; every typed individual when absent.
        #[arg(long = "instance")]
        instances: Vec<String>,
    },
}

type Prefixes = BTreeMap<String, String>;

fn default_prefixes() -> Prefixes {
    BTreeMap::from([("dt".to_owned(), vocab::DT.to_owned()), ("reef".to_owned(), vocab::REEF.to_owned())])
}

fn load_ontology(path: &Path, prefixes: &mut Prefixes) -> Result<Ontology> {
    let graph = load_graph(path)?;
    prefixes.extend(graph.prefixes().clone());
    Ontology::from_graph(&graph).map_err(|e| anyhow!("{}: {e}", path.display()))
}

fn emit(io: &mut Io<'_>, onto: &Ontology, prefixes: &Prefixes, out: &Option<PathBuf>) -> Result<()> {
    let mut graph = onto.to_graph();
    for (prefix, base) in prefixes {
        if !graph.prefixes().contains_key(prefix) {
            graph.set_prefix(prefix.clone(), base.clone());
        }
    }
    let text = serialize_graph(&graph);
    match out {
        Some(path) => write_atomic(path, &text),
        None => Ok(io.out.write_all(text.as_bytes())?),
    }
}

fn describe(warning: &MergeWarning) -> String {
    match warning {
        MergeWarning::NameConflict { concept, source, label, source_label } => {
            format!("name conflict: {concept} ({label:?}) aligned with {source} ({source_label:?})")
        }
        MergeWarning::AmbiguousMatch { concept, aligned, ignored } => {
            format!("{concept} matches both {aligned} and {ignored}; only {aligned} is aligned")
        }
        MergeWarning::RedundantEdge { child, parent } => {
            format!("redundant edge {child} ⊑ {parent} removed")
        }
    }
}

pub fn cmd_ontology(cmd: &OntologyCommand, io: &mut Io<'_>) -> Result<i32> {
    let mut prefixes = default_prefixes();
    match cmd {
        OntologyCommand::ImportThesaurus { input, base, out } => {
            let entries = parse_thesaurus(&read_text(input)?).map_err(|e| anyhow!("{}: {e}", input.display()))?;
            let onto = import_thesaurus(&entries, base).map_err(|e| anyhow!("{}: {e}", input.display()))?;
            if base != vocab::REEF {
                prefixes.remove("reef");
            }
            emit(io, &onto, &prefixes, out)?;
        }
        OntologyCommand::Reduce { input, out } => {
            let onto = load_ontology(input, &mut prefixes)?;
            let onto = transitive_reduction(&onto).map_err(|e| anyhow!("{}: {e}", input.display()))?;
            emit(io, &onto, &prefixes, out)?;
        }
        OntologyCommand::Merge { reef, dt, out } => {
            let reef = load_ontology(reef, &mut prefixes)?;
            let dt = load_ontology(dt, &mut prefixes)?;
            let outcome = merge_intersection(&reef, &dt)?;
            for w in &outcome.warnings {
                io.warn(&describe(w));
            }
            emit(io, &outcome.ontology, &prefixes, out)?;
        }
        OntologyCommand::Classify { ontology, graph, instances } => classify(io, ontology, graph, instances)?,
    }
    Ok(EXIT_OK)
}

fn classify(io: &mut Io<'_>, ontology: &[PathBuf], graph: &[PathBuf], instances: &[String]) -> Result<()> {
    let mut data = Graph::new();
    for path in ontology.iter().chain(graph) {
        data.extend_from(&load_graph(path)?);
    }
    let onto = Ontology::from_graph(&data)?;
    close_in_place(&mut data);
    let mut prefixes = builtin_prefixes();
    prefixes.extend(data.prefixes().clone());
    let targets: Vec<Iri> = if instances.is_empty() {
        let mut found: Vec<Iri> = data
            .with_predicate(vocab::RDF_TYPE)
            .into_iter()
            .filter(|t| !onto.concepts.contains(&t.subject) && !onto.properties.contains(&t.subject))
            .filter(|t| !matches!(&t.object, Term::Iri(c) if c.as_str() == vocab::ONTO_CONCEPT_DEF || c.as_str() == vocab::OWL_CLASS || c.as_str() == vocab::OWL_OBJECT_PROPERTY))
            .map(|t| t.subject.clone())
            .collect();
        found.sort();
        found.dedup();
        found
    } else {
        instances.iter().map(|i| resolve_iri(i, &prefixes)).collect::<Result<_>>()?
    };
    for instance in &targets {
        for def in &onto.axioms {
            writeln!(io.out, "{instance}\t{}\t{}", def.defined, classify_instance(&data, instance, def))?;
        }
    }
    Ok(())
}
