//! Triple storage: terms, an indexed statement set, the `.trp` file format,
//! basic graph pattern matching and subclass/type inference.

mod format;
mod graph;
mod infer;
mod term;

pub use format::{compact_iri, parse_graph, parse_into, serialize_graph, write_term, ParseError};
pub(crate) use format::{resolve_name, unescape, NameError};
pub use graph::{builtin_prefixes, Binding, Graph, PatternTerm, TriplePattern};
pub use infer::{close_in_place, infer_closure, superclass_closure};
pub use term::{Datatype, Iri, Literal, Term, TermError, Triple};

/// Free-function form of [`Graph::insert`].
pub fn insert(mut graph: Graph, triple: Triple) -> Graph {
    graph.insert(triple);
    graph
}

/// Free-function form of [`Graph::match_pattern`].
pub fn match_pattern(graph: &Graph, patterns: &[TriplePattern]) -> Vec<Binding> {
    graph.match_pattern(patterns)
}
