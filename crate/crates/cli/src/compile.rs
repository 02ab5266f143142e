use std::path::{Path, PathBuf};

use anyhow::{anyhow, Result};
use clap::Args;
use regcheck_core::kgstore::serialize_graph;
use regcheck_core::rulebase::{
    compile_table, coverage_rule, rulebase_prefixes, serialize_sbvr_base, write_rulebase, RuleMetadata, SlopeTable,
};

use crate::fsio::{read_text, write_atomic};
use crate::{Io, EXIT_OK};

#[derive(Debug, Clone, Args)]
pub struct CompileConfig {
    /// Slope table (csv with `;`, tab or `,` separators).
    pub table_path: PathBuf,
    /// Rulebase to write (.rb.txt).
    #[arg(long = "out")]
    pub out_rulebase_path: PathBuf,
    /// SBVR base to write; defaults to `<name>.sbvr.trp` next to the
    /// rulebase, `<name>` being the rulebase file name up to its first dot.
    #[arg(long = "sbvr-out")]
    pub sbvr_path: Option<PathBuf>,
    /// Also emit the rule flagging tiles whose slope is not a table row.
    #[arg(long)]
    pub coverage: bool,
    #[arg(long, default_value = "Guide \"Coverage and Tile\"")]
    pub source: String,
    #[arg(long, default_value = "Security")]
    pub domain: String,
    #[arg(long, default_value = "Tile")]
    pub theme: String,
}

pub fn default_sbvr_path(rulebase: &Path) -> PathBuf {
    let name = rulebase.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let stem = name.split('.').next().filter(|s| !s.is_empty()).unwrap_or("rules");
    rulebase.with_file_name(format!("{stem}.sbvr.trp"))
}

pub fn cmd_compile_table(cfg: &CompileConfig, io: &mut Io<'_>) -> Result<i32> {
    let text = read_text(&cfg.table_path)?;
    let table = SlopeTable::parse(&text).map_err(|e| anyhow!("{}: {e}", cfg.table_path.display()))?;
    let meta = RuleMetadata::new(cfg.source.as_str(), cfg.domain.as_str(), cfg.theme.as_str());
    let mut rules = compile_table(&table, &meta);
    if cfg.coverage {
        rules.push(coverage_rule(&table, &meta));
    }
    let sbvr_path = cfg.sbvr_path.clone().unwrap_or_else(|| default_sbvr_path(&cfg.out_rulebase_path));
    let rulebase = write_rulebase(&rules, &rulebase_prefixes());
    let sbvr = serialize_graph(&serialize_sbvr_base(&rules));
    write_atomic(&cfg.out_rulebase_path, &rulebase)?;
    write_atomic(&sbvr_path, &sbvr)?;
    writeln!(
        io.out,
        "{} rules written to {}; SBVR base written to {}",
        rules.len(),
        cfg.out_rulebase_path.display(),
        sbvr_path.display()
    )?;
    Ok(EXIT_OK)
}
