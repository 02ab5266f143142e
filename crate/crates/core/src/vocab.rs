//! IRIs of the vocabularies the engine understands.

pub const RDF: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#";
pub const RDFS: &str = "http://www.w3.org/2000/01/rdf-schema#";
pub const OWL: &str = "http://www.w3.org/2002/07/owl#";
pub const XSD: &str = "http://www.w3.org/2001/XMLSchema#";

pub const RDF_TYPE: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";
pub const RDFS_SUBCLASS_OF: &str = "http://www.w3.org/2000/01/rdf-schema#subClassOf";
pub const RDFS_LABEL: &str = "http://www.w3.org/2000/01/rdf-schema#label";
pub const OWL_CLASS: &str = "http://www.w3.org/2002/07/owl#Class";
pub const OWL_OBJECT_PROPERTY: &str = "http://www.w3.org/2002/07/owl#ObjectProperty";

/// Technical-document vocabulary (components, characteristics, SBVR links).
pub const DT: &str = "http://example.org/ontodt#";
pub const DT_HAS_SBVR: &str = "http://example.org/ontodt#hasSBVR";
pub const DT_HAS_SBVR_RULE: &str = "http://example.org/ontodt#hasSBVRrule";

/// Thesaurus-derived concepts.
pub const REEF: &str = "http://www.cstb.fr/reef/#";

/// Ontology bookkeeping: concept definitions and alignments.
pub const ONTO: &str = "http://example.org/regcheck/onto#";
pub const ONTO_CONCEPT_DEF: &str = "http://example.org/regcheck/onto#ConceptDef";
pub const ONTO_DEFINES: &str = "http://example.org/regcheck/onto#defines";
pub const ONTO_BASE: &str = "http://example.org/regcheck/onto#base";
pub const ONTO_RESTRICTION: &str = "http://example.org/regcheck/onto#restriction";
pub const ONTO_INDEX: &str = "http://example.org/regcheck/onto#index";
pub const ONTO_RESTRICTS_PROPERTY: &str = "http://example.org/regcheck/onto#restrictsProperty";
pub const ONTO_SOME_VALUES_FROM: &str = "http://example.org/regcheck/onto#someValuesFrom";
pub const ONTO_HAS_VALUE: &str = "http://example.org/regcheck/onto#hasValue";
pub const ONTO_ALIGNED_WITH: &str = "http://example.org/regcheck/onto#alignedWith";

/// Process control vocabulary.
pub const PROC: &str = "http://example.org/regcheck/proc#";

/// Compiled rules and their SBVR nodes.
pub const RULES: &str = "http://example.org/regcheck/rules#";
pub const SBVR: &str = "http://example.org/regcheck/sbvr#";

pub fn proc(local: &str) -> String {
    format!("{PROC}{local}")
}

pub fn dt(local: &str) -> String {
    format!("{DT}{local}")
}
