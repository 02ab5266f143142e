//! Compliance checking of building-industry technical documents.
//!
//! A technical document is loaded as a triple graph next to the technical
//! document ontology. Regulatory rules pair an SBVR controlled-language
//! sentence with an `ASK` violation query; processes built from the control
//! vocabulary (`Pipeline`, `Pipe`, `Load`, `Query`, `Update`, `RuleBase`,
//! `Rule`, `Test`) run those rules and emit events, and the report module
//! turns violation events back into the SBVR sentences that justify them.

pub mod kgstore;
pub mod ontology;
pub mod pipeline;
pub mod query;
pub mod report;
pub mod rulebase;
pub mod text;
pub mod vocab;
