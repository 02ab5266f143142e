//! Transitive reduction of the subclass hierarchy.
//!
//! For a DAG the reduction is the unique smallest edge set with the same
//! reachability. An edge `child ⊑ parent` is redundant exactly when `parent`
//! is reachable from another direct parent of `child`.

use std::collections::{BTreeMap, BTreeSet};

use super::{Ontology, OntologyError};
use crate::kgstore::Iri;

struct Indexed<'a> {
    nodes: Vec<&'a Iri>,
    parents: Vec<Vec<usize>>,
}

fn index<'a>(edges: &'a BTreeSet<(Iri, Iri)>) -> Indexed<'a> {
    let mut ids: BTreeMap<&Iri, usize> = BTreeMap::new();
    let mut nodes = Vec::new();
    for (c, p) in edges {
        for n in [c, p] {
            ids.entry(n).or_insert_with(|| {
                nodes.push(n);
                nodes.len() - 1
            });
        }
    }
    let mut parents = vec![Vec::new(); nodes.len()];
    for (c, p) in edges {
        parents[ids[c]].push(ids[p]);
    }
    Indexed { nodes, parents }
}

/// Nodes ordered so that every parent precedes its children, or one cycle.
fn parents_first(g: &Indexed) -> Result<Vec<usize>, Vec<usize>> {
    let n = g.nodes.len();
    let mut remaining: Vec<usize> = g.parents.iter().map(Vec::len).collect();
    let mut children = vec![Vec::new(); n];
    for (c, ps) in g.parents.iter().enumerate() {
        for &p in ps {
            children[p].push(c);
        }
    }
    let mut ready: Vec<usize> = (0..n).filter(|&i| remaining[i] == 0).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(node) = ready.pop() {
        order.push(node);
        for &c in &children[node] {
            remaining[c] -= 1;
            if remaining[c] == 0 {
                ready.push(c);
            }
        }
    }
    if order.len() == n {
        return Ok(order);
    }
    // Every unprocessed node still has an unprocessed parent, so walking
    // parents from any of them must revisit a node.
    let stuck: Vec<bool> = remaining.iter().map(|&r| r > 0).collect();
    let start = (0..n).find(|&i| stuck[i]).expect("cycle exists");
    let mut position = vec![None; n];
    let mut path = Vec::new();
    let mut cur = start;
    loop {
        if let Some(pos) = position[cur] {
            return Err(path[pos..].to_vec());
        }
        position[cur] = Some(path.len());
        path.push(cur);
        cur = *g.parents[cur].iter().find(|&&p| stuck[p]).expect("stuck node has stuck parent");
    }
}

/// One cycle of the edge set, if any, as its member list in edge order.
pub fn find_cycle(edges: &BTreeSet<(Iri, Iri)>) -> Option<Vec<Iri>> {
    let g = index(edges);
    parents_first(&g)
        .err()
        .map(|cycle| cycle.into_iter().map(|i| g.nodes[i].clone()).collect())
}

/// The minimum edge subset with the same transitive closure.
pub fn reduce_edges(edges: &BTreeSet<(Iri, Iri)>) -> Result<BTreeSet<(Iri, Iri)>, Vec<Iri>> {
    let g = index(edges);
    let order = parents_first(&g)
        .map_err(|cycle| cycle.into_iter().map(|i| g.nodes[i].clone()).collect::<Vec<_>>())?;
    let n = g.nodes.len();
    let words = n.div_ceil(64).max(1);
    let mut ancestors = vec![vec![0u64; words]; n];
    for &node in &order {
        let mut acc = vec![0u64; words];
        for &p in &g.parents[node] {
            acc[p / 64] |= 1 << (p % 64);
            for (a, b) in acc.iter_mut().zip(&ancestors[p]) {
                *a |= b;
            }
        }
        ancestors[node] = acc;
    }
    let has = |set: &[u64], i: usize| set[i / 64] & (1 << (i % 64)) != 0;
    let mut kept = BTreeSet::new();
    for (c, ps) in g.parents.iter().enumerate() {
        for &p in ps {
            let implied = ps.iter().any(|&q| q != p && has(&ancestors[q], p));
            if !implied {
                kept.insert((g.nodes[c].clone(), g.nodes[p].clone()));
            }
        }
    }
    Ok(kept)
}

/// Removes every subclass edge implied by transitivity. Concepts, labels and
/// axioms are untouched.
pub fn transitive_reduction(onto: &Ontology) -> Result<Ontology, OntologyError> {
    let edges = reduce_edges(&onto.subclass_edges).map_err(OntologyError::Cycle)?;
    Ok(Ontology {
        subclass_edges: edges,
        ..onto.clone()
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(pairs: &[(&str, &str)]) -> BTreeSet<(Iri, Iri)> {
        pairs
            .iter()
            .map(|(c, p)| (Iri::new(format!("http://ex/{c}")).unwrap(), Iri::new(format!("http://ex/{p}")).unwrap()))
            .collect()
    }

    #[test]
    fn removes_implied_edge() {
        let reduced = reduce_edges(&e(&[("A", "B"), ("B", "C"), ("A", "C")])).unwrap();
        assert_eq!(reduced, e(&[("A", "B"), ("B", "C")]));
    }

    #[test]
    fn reduced_chain_is_a_fixpoint() {
        let chain = e(&[("A", "B"), ("B", "C"), ("C", "D")]);
        assert_eq!(reduce_edges(&chain).unwrap(), chain);
    }

    #[test]
    fn diamond_keeps_both_paths() {
        let diamond = e(&[("A", "B"), ("A", "C"), ("B", "D"), ("C", "D"), ("A", "D")]);
        assert_eq!(
            reduce_edges(&diamond).unwrap(),
            e(&[("A", "B"), ("A", "C"), ("B", "D"), ("C", "D")])
        );
    }

    #[test]
    fn cycle_is_reported_with_members() {
        let cyclic = e(&[("A", "B"), ("B", "C"), ("C", "A"), ("D", "A")]);
        let mut cycle = reduce_edges(&cyclic).unwrap_err();
        cycle.sort();
        let names: Vec<&str> = cycle.iter().map(Iri::local_name).collect();
        assert_eq!(names, ["A", "B", "C"]);
    }

    #[test]
    fn ontology_reduction_reports_cycle() {
        let onto = Ontology {
            subclass_edges: e(&[("A", "B"), ("B", "A")]),
            ..Default::default()
        };
        assert!(matches!(transitive_reduction(&onto), Err(OntologyError::Cycle(c)) if c.len() == 2));
    }
}
