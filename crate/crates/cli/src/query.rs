use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Result};
use clap::Args;
use regcheck_core::kgstore::{builtin_prefixes, close_in_place, Graph, Term};
use regcheck_core::query::{eval_ask, eval_select, instantiate_template, parse_query, placeholders, QueryForm};
use regcheck_core::rulebase::rulebase_prefixes;

use crate::fsio::{load_graph, read_text};
use crate::names::param_value;
use crate::{Io, EXIT_FAIL, EXIT_OK};

#[derive(Debug, Clone, Args)]
pub struct QueryConfig {
    /// Query file, or the query text itself when no such file exists.
    pub query: String,
    /// Triple files queried together; repeatable.
    #[arg(long = "graph")]
    pub graph_paths: Vec<PathBuf>,
    /// Value for a `{{name}}` placeholder, as `name=value`; repeatable.
    #[arg(long = "param", value_name = "NAME=VALUE")]
    pub params: Vec<String>,
}

pub fn cmd_query(cfg: &QueryConfig, io: &mut Io<'_>) -> Result<i32> {
    let mut graph = Graph::new();
    for path in &cfg.graph_paths {
        graph.extend_from(&load_graph(path)?);
    }
    close_in_place(&mut graph);
    let mut prefixes = builtin_prefixes();
    prefixes.extend(rulebase_prefixes());
    prefixes.extend(graph.prefixes().clone());

    let path = Path::new(&cfg.query);
    let (mut text, origin) = if path.is_file() {
        (read_text(path)?, path.display().to_string())
    } else {
        (cfg.query.clone(), "query".to_owned())
    };

    let mut params = BTreeMap::new();
    for p in &cfg.params {
        let (name, value) = p.split_once('=').ok_or_else(|| anyhow!("--param `{p}` is not NAME=VALUE"))?;
        params.insert(name.trim().to_owned(), param_value(value, &graph, &prefixes)?);
    }
    let wanted = placeholders(&text);
    for name in params.keys().filter(|n| !wanted.contains(n)) {
        io.warn(&format!("parameter `{name}` matches no placeholder"));
    }
    if !wanted.is_empty() {
        text = instantiate_template(&text, &params, &prefixes).map_err(|e| anyhow!("{origin}: {e}"))?;
    }
    let query = parse_query(&text, &prefixes).map_err(|e| anyhow!("{origin}:{e}"))?;

    match query.form {
        QueryForm::Ask => {
            let holds = eval_ask(&graph, &query)?;
            writeln!(io.out, "{holds}")?;
            Ok(if holds { EXIT_OK } else { EXIT_FAIL })
        }
        QueryForm::Select => {
            for row in eval_select(&graph, &query)? {
                let cells: Vec<&str> = query
                    .projection
                    .iter()
                    .map(|v| row.get(v).map_or("", Term::lexical_form))
                    .collect();
                if cells.iter().any(|c| c.contains(['\t', '\n'])) {
                    bail!("result value contains a tab or newline and cannot be printed as a row");
                }
                writeln!(io.out, "{}", cells.join("\t"))?;
            }
            Ok(EXIT_OK)
        }
    }
}
