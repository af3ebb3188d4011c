//! Exhaustive isomorphism test for small property graphs.

use std::collections::{BTreeMap, BTreeSet};

use crate::graph::{ElementData, ObjectId, PropertyGraph};

/// A node bijection `a -> b` preserving edges and element data exactly.
pub fn find_isomorphism(a: &PropertyGraph, b: &PropertyGraph) -> Option<BTreeMap<ObjectId, ObjectId>> {
    find_isomorphism_by(a, b, |x, y| x == y, |x, y| x == y)
}

pub fn are_isomorphic(a: &PropertyGraph, b: &PropertyGraph) -> bool {
    find_isomorphism(a, b).is_some()
}

/// Structure-only isomorphism, ignoring all properties.
pub fn are_isomorphic_structurally(a: &PropertyGraph, b: &PropertyGraph) -> bool {
    find_isomorphism_by(a, b, |_, _| true, |_, _| true).is_some()
}

/// Isomorphism with caller-supplied compatibility of node and edge data.
///
/// Edges between a pair of nodes are compared as multisets: every edge of `a`
/// between `(u, v)` must pair with a distinct compatible edge of `b` between
/// the images.
pub fn find_isomorphism_by<N, E>(
    a: &PropertyGraph,
    b: &PropertyGraph,
    node_eq: N,
    edge_eq: E,
) -> Option<BTreeMap<ObjectId, ObjectId>>
where
    N: Fn(&ElementData, &ElementData) -> bool,
    E: Fn(&ElementData, &ElementData) -> bool,
{
    if a.node_count() != b.node_count() || a.edge_count() != b.edge_count() {
        return None;
    }
    let degree = |g: &PropertyGraph, n: &ObjectId| {
        let out = g.out_edges(n);
        let loops = out.iter().filter(|(_, t)| t == n).count();
        (out.len(), g.in_edges(n).len(), loops)
    };
    let a_nodes: Vec<ObjectId> = a.node_ids().cloned().collect();
    let candidates: Vec<Vec<ObjectId>> = a_nodes
        .iter()
        .map(|n| {
            let da = degree(a, n);
            b.node_ids()
                .filter(|m| degree(b, m) == da && node_eq(a.node(n).unwrap(), b.node(m).unwrap()))
                .cloned()
                .collect()
        })
        .collect();
    if candidates.iter().any(|c| c.is_empty()) {
        return None;
    }

    let mut state = Search {
        a,
        b,
        edge_eq: &edge_eq,
        order: a_nodes,
        candidates,
        map: BTreeMap::new(),
        used: BTreeSet::new(),
    };
    if state.extend(0) {
        Some(state.map)
    } else {
        None
    }
}

struct Search<'a, E> {
    a: &'a PropertyGraph,
    b: &'a PropertyGraph,
    edge_eq: &'a E,
    order: Vec<ObjectId>,
    candidates: Vec<Vec<ObjectId>>,
    map: BTreeMap<ObjectId, ObjectId>,
    used: BTreeSet<ObjectId>,
}

impl<E> Search<'_, E>
where
    E: Fn(&ElementData, &ElementData) -> bool,
{
    fn extend(&mut self, depth: usize) -> bool {
        if depth == self.order.len() {
            return true;
        }
        let n = self.order[depth].clone();
        for m in self.candidates[depth].clone() {
            if self.used.contains(&m) {
                continue;
            }
            self.map.insert(n.clone(), m.clone());
            if self.consistent(&n) {
                self.used.insert(m.clone());
                if self.extend(depth + 1) {
                    return true;
                }
                self.used.remove(&m);
            }
            self.map.remove(&n);
        }
        false
    }

    fn consistent(&self, n: &ObjectId) -> bool {
        self.map.keys().all(|u| {
            self.pair_matches(n, u) && (u == n || self.pair_matches(u, n))
        })
    }

    fn pair_matches(&self, s: &ObjectId, t: &ObjectId) -> bool {
        let fa: Vec<&ElementData> = self
            .a
            .edges_between(s, t)
            .map(|e| &self.a.edge(e).unwrap().data)
            .collect();
        let mut fb: Vec<&ElementData> = self
            .b
            .edges_between(&self.map[s], &self.map[t])
            .map(|e| &self.b.edge(e).unwrap().data)
            .collect();
        if fa.len() != fb.len() {
            return false;
        }
        for x in fa {
            match fb.iter().position(|y| (self.edge_eq)(x, y)) {
                Some(i) => {
                    fb.swap_remove(i);
                }
                None => return false,
            }
        }
        true
    }
}
