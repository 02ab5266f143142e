use std::fs;
use std::io::Write;
use std::path::Path;

use anyhow::{anyhow, Context, Result};
use regcheck_core::kgstore::{parse_graph, Graph};

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

pub fn load_graph(path: &Path) -> Result<Graph> {
    let text = read_text(path)?;
    parse_graph(&text).map_err(|e| anyhow!("{}: {e}", path.display()))
}

/// Writes through a temporary file in the target directory and renames it
/// into place, so a failed command never leaves a partial file behind.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).with_context(|| format!("cannot write to {}", dir.display()))?;
    tmp.write_all(contents.as_bytes())?;
    tmp.persist(path).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}
