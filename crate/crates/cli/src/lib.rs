//! The `regcheck` command line: compliance checks of technical documents,
//! ontology construction, table compilation and ad hoc queries.
//!
//! Exit status: 0 compliant (or `ASK` true), 1 noncompliant (or `ASK`
//! false), 2 for any configuration or structural error.

mod check;
mod compile;
mod fsio;
mod names;
mod ontology;
mod query;

use std::ffi::OsString;
use std::io::Write;

use clap::{Parser, Subcommand};

pub use check::{cmd_check, CheckConfig, ReportFormatArg};
pub use compile::{cmd_compile_table, CompileConfig};
pub use ontology::{cmd_ontology, OntologyCommand};
pub use query::{cmd_query, QueryConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_ERROR: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "regcheck", version, about = "Regulatory compliance checking of technical documents")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a technical document against a rulebase.
    Check(CheckConfig),
    /// Build, reduce, merge and query ontologies.
    #[command(subcommand)]
    Ontology(OntologyCommand),
    /// Compile a slope/recovery table into a rulebase and its SBVR base.
    CompileTable(CompileConfig),
    /// Evaluate an ASK or SELECT query over triple files.
    Query(QueryConfig),
}

/// Output sinks of a command.
pub struct Io<'a> {
    pub out: &'a mut dyn Write,
    pub err: &'a mut dyn Write,
}

impl Io<'_> {
    pub(crate) fn warn(&mut self, message: &str) {
        let _ = writeln!(self.err, "warning: {message}");
    }
}

/// Parses `args` (program name first) and runs the command, returning the
/// exit status.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
            let rendered = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(rendered.as_bytes()) } else { out.write_all(rendered.as_bytes()) };
            return code;
        }
    };
    let mut io = Io { out, err };
    let result = match cli.command {
        Command::Check(cfg) => cmd_check(&cfg, &mut io),
        Command::Ontology(cmd) => cmd_ontology(&cmd, &mut io),
        Command::CompileTable(cfg) => cmd_compile_table(&cfg, &mut io),
        Command::Query(cfg) => cmd_query(&cfg, &mut io),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            for line in e.to_string().lines() {
                let _ = writeln!(io.err, "error: {line}");
            }
            EXIT_ERROR
        }
    }
}
