use super::{ConceptDef, Filler};
use crate::kgstore::{Graph, Iri, Term};
use crate::vocab;

/// Whether `instance` satisfies every conjunct of `def` in a graph already
/// closed under subclass and type inference.
pub fn classify_instance(graph: &Graph, instance: &Iri, def: &ConceptDef) -> bool {
    let types = graph.objects(instance, vocab::RDF_TYPE);
    let has_type = |node: &Iri, class: &Iri| {
        graph
            .objects(node, vocab::RDF_TYPE)
            .iter()
            .any(|t| t.as_iri() == Some(class))
    };
    def.base.iter().all(|b| types.iter().any(|t| t.as_iri() == Some(b)))
        && def.restrictions.iter().all(|r| {
            let values = graph.objects(instance, r.property.as_str());
            match &r.filler {
                Filler::Concept(class) => values
                    .iter()
                    .any(|v| matches!(v, Term::Iri(node) if has_type(node, class))),
                Filler::Value(expected) => values.contains(&expected),
            }
        })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kgstore::{infer_closure, parse_graph, Literal};
    use crate::ontology::Restriction;

    fn dt(s: &str) -> Iri {
        Iri::new(vocab::dt(s)).unwrap()
    }

    fn plat_clay_tile() -> ConceptDef {
        ConceptDef {
            defined: dt("PlatClayTile"),
            base: vec![dt("Tile")],
            restrictions: vec![
                Restriction { property: dt("hasMaterial"), filler: Filler::Concept(dt("Clay")) },
                Restriction { property: dt("hasAForm"), filler: Filler::Concept(dt("Flat")) },
            ],
        }
    }

    const TILE: &str = "@prefix dt: <http://example.org/ontodt#> .
dt:t1 rdf:type dt:Tile .
dt:t1 dt:hasMaterial dt:m1 .
dt:m1 rdf:type dt:Clay .
dt:f1 rdf:type dt:Flat .
";

    #[test]
    fn all_conjuncts_hold() {
        let g = infer_closure(&parse_graph(&format!("{TILE}dt:t1 dt:hasAForm dt:f1 .\n")).unwrap());
        assert!(classify_instance(&g, &dt("t1"), &plat_clay_tile()));
    }

    #[test]
    fn missing_conjunct_fails() {
        let g = infer_closure(&parse_graph(TILE).unwrap());
        assert!(!classify_instance(&g, &dt("t1"), &plat_clay_tile()));
    }

    #[test]
    fn inferred_types_count() {
        let g = infer_closure(
            &parse_graph(&format!(
                "{TILE}dt:t1 dt:hasAForm dt:f1 .\ndt:t2 rdf:type dt:RoofTile .\ndt:RoofTile rdfs:subClassOf dt:Tile .\ndt:t2 dt:hasMaterial dt:m1 .\ndt:t2 dt:hasAForm dt:f1 .\n"
            ))
            .unwrap(),
        );
        assert!(classify_instance(&g, &dt("t2"), &plat_clay_tile()));
    }

    #[test]
    fn literal_filler_uses_value_equality() {
        let def = ConceptDef {
            defined: dt("Steep"),
            base: vec![],
            restrictions: vec![Restriction {
                property: dt("hasSlope"),
                filler: Filler::Value(Term::Literal(Literal::integer(70))),
            }],
        };
        let g = parse_graph("@prefix dt: <http://example.org/ontodt#> .\ndt:t1 dt:hasSlope \"070\"^^integer .").unwrap();
        assert!(classify_instance(&g, &dt("t1"), &def));
        let g = parse_graph("@prefix dt: <http://example.org/ontodt#> .\ndt:t1 dt:hasSlope \"70\" .").unwrap();
        assert!(!classify_instance(&g, &dt("t1"), &def));
    }
}
