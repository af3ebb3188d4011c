//! Random graphs, typings and rules for the property suites.

use std::collections::{BTreeMap, BTreeSet};

use pgse_core::graph::{ElementData, ObjectId, PropertyDictionary, PropertyGraph};
use pgse_core::hom::Homomorphism;
use pgse_core::rewrite::{apply_restrictive, Matching, Rule};
use pgse_core::{DataType, Value};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub type Rng8 = ChaCha8Rng;

const KEYS: [&str; 3] = ["a", "b", "c"];

pub fn id(s: impl Into<String>) -> ObjectId {
    ObjectId::new(s)
}

fn values(rng: &mut Rng8) -> BTreeSet<Value> {
    (0..4).filter(|_| rng.gen_bool(0.4)).map(Value::Int).collect()
}

/// Random properties over a small key and value space. `tokens` lets value
/// sets contain the integer type token.
pub fn data(rng: &mut Rng8, mandatory: bool, tokens: bool) -> ElementData {
    let mut d = ElementData::default();
    for k in KEYS {
        if rng.gen_bool(0.5) {
            let mut vs = values(rng);
            if tokens && rng.gen_bool(0.2) {
                vs.insert(DataType::Integer.token());
            }
            d.props.set(k, vs);
            if mandatory && rng.gen_bool(0.3) {
                d.mandatory.insert(k.to_owned());
            }
        }
    }
    d
}

/// A sub-dictionary of `d`. Keys in `keep` survive with their mark.
pub fn sub_data(rng: &mut Rng8, d: &ElementData, keep: &BTreeSet<String>) -> ElementData {
    let mut out = ElementData::default();
    for (k, vs) in d.props.iter() {
        let kept = keep.contains(k);
        if !kept && rng.gen_bool(0.3) {
            continue;
        }
        let sub: BTreeSet<Value> = vs.iter().filter(|_| rng.gen_bool(0.7)).cloned().collect();
        out.props.set(k.clone(), sub);
        if d.mandatory.contains(k) && (kept || rng.gen_bool(0.7)) {
            out.mandatory.insert(k.clone());
        }
    }
    out
}

/// Instance-side sub-dictionary: concrete values only, every mandatory key kept.
fn typed_data(rng: &mut Rng8, t: &ElementData) -> ElementData {
    let mut out = ElementData::default();
    for (k, domain) in t.props.iter() {
        let mandatory = t.mandatory.contains(k);
        if !mandatory && rng.gen_bool(0.4) {
            continue;
        }
        let mut vs: BTreeSet<Value> =
            domain.iter().filter(|v| v.as_type_token().is_none() && rng.gen_bool(0.6)).cloned().collect();
        if domain.contains(&DataType::Integer.token()) && rng.gen_bool(0.5) {
            vs.insert(Value::Int(rng.gen_range(10..13)));
        }
        out.props.set(k.clone(), vs);
        if mandatory || rng.gen_bool(0.2) {
            out.mandatory.insert(k.clone());
        }
    }
    out
}

pub fn schema(rng: &mut Rng8, max_nodes: usize, tokens: bool) -> PropertyGraph {
    let mut s = PropertyGraph::new(true);
    let n = rng.gen_range(1..=max_nodes);
    for i in 0..n {
        s.add_node(format!("T{i}"), data(rng, true, tokens)).unwrap();
    }
    let ids: Vec<ObjectId> = s.node_ids().cloned().collect();
    for a in &ids {
        for b in &ids {
            if rng.gen_bool(0.4) {
                // schema edges carry no marks, see the ledger on merges
                s.add_fresh_edge(a, b, data(rng, false, tokens)).unwrap();
            }
        }
    }
    s
}

/// A random instance together with a valid typing into `s`.
pub fn instance(rng: &mut Rng8, s: &PropertyGraph, max_nodes: usize) -> (PropertyGraph, Homomorphism) {
    let types: Vec<ObjectId> = s.node_ids().cloned().collect();
    let mut g = PropertyGraph::new(true);
    let mut h = Homomorphism::new();
    for i in 0..rng.gen_range(1..=max_nodes) {
        let t = types.choose(rng).unwrap().clone();
        let n = g.add_node(format!("n{i}"), typed_data(rng, s.node(&t).unwrap())).unwrap();
        h.insert(n, t);
    }
    let ids: Vec<ObjectId> = g.node_ids().cloned().collect();
    for a in &ids {
        for b in &ids {
            if let Some(f) = s.edge_between(&h.node_map[a], &h.node_map[b]) {
                if rng.gen_bool(0.5) {
                    let d = typed_data(rng, &s.edge(f).unwrap().data);
                    g.add_fresh_edge(a, b, d).unwrap();
                }
            }
        }
    }
    g.set_id_counter(1000);
    (g, h)
}

/// Arbitrary small graph, not necessarily typed by anything.
pub fn any_graph(rng: &mut Rng8, max_nodes: usize, simple: bool) -> PropertyGraph {
    let mut g = PropertyGraph::new(simple);
    for i in 0..rng.gen_range(0..=max_nodes) {
        g.add_node(format!("v{i}"), data(rng, true, false)).unwrap();
    }
    let ids: Vec<ObjectId> = g.node_ids().cloned().collect();
    for a in &ids {
        for b in &ids {
            let copies = if simple { 1 } else { rng.gen_range(1..=2) };
            for _ in 0..copies {
                if rng.gen_bool(0.35) {
                    g.add_fresh_edge(a, b, data(rng, true, false)).unwrap();
                }
            }
        }
    }
    g
}

/// What a generated rule may do.
#[derive(Clone, Copy)]
pub struct RuleShape {
    pub restrictive: bool,
    pub expansive: bool,
    /// Expansive steps never add mandatory marks and merge only nodes whose
    /// marks coincide.
    pub no_new_marks: bool,
}

/// A rule `L <- P -> R` with an injective matching into `host`.
///
/// `protect` gives, for a host node, keys the restrictive phase must keep
/// (together with their mark).
pub fn rule(
    rng: &mut Rng8,
    host: &PropertyGraph,
    shape: RuleShape,
    protect: &dyn Fn(&ObjectId) -> BTreeSet<String>,
) -> (Rule, Matching) {
    let mut hosts: Vec<ObjectId> = host.node_ids().cloned().collect();
    hosts.shuffle(rng);
    hosts.truncate(rng.gen_range(1..=3.min(hosts.len())));

    let mut lhs = PropertyGraph::new(true);
    let mut m = Homomorphism::new();
    let mut protected: BTreeMap<ObjectId, BTreeSet<String>> = BTreeMap::new();
    for (i, hn) in hosts.iter().enumerate() {
        let x = id(format!("x{i}"));
        let keep = protect(hn);
        lhs.add_node(x.clone(), sub_data(rng, host.node(hn).unwrap(), &keep)).unwrap();
        m.insert(x.clone(), hn.clone());
        protected.insert(x, keep);
    }
    let xs: Vec<ObjectId> = lhs.node_ids().cloned().collect();
    for a in &xs {
        for b in &xs {
            if let Some(e) = host.edge_between(&m.node_map[a], &m.node_map[b]) {
                if rng.gen_bool(0.6) {
                    let d = sub_data(rng, &host.edge(e).unwrap().data, &BTreeSet::new());
                    lhs.add_fresh_edge(a, b, d).unwrap();
                }
            }
        }
    }

    // P: delete, keep or clone each L node
    let (preserved, l_map) = if shape.restrictive {
        let mut preserved = PropertyGraph::new(true);
        let mut l_map = Homomorphism::new();
        for x in &xs {
            let copies = match rng.gen_range(0..20) {
                0..=2 => 0,
                3..=7 => 2,
                _ => 1,
            };
            for c in 0..copies {
                let p = id(format!("{x}_{c}"));
                preserved.add_node(p.clone(), sub_data(rng, lhs.node(x).unwrap(), &protected[x])).unwrap();
                l_map.insert(p, x.clone());
            }
        }
        let ps: Vec<ObjectId> = preserved.node_ids().cloned().collect();
        for a in &ps {
            for b in &ps {
                if let Some(e) = lhs.edge_between(&l_map.node_map[a], &l_map.node_map[b]) {
                    if rng.gen_bool(0.7) {
                        let d = sub_data(rng, &lhs.edge(e).unwrap().data, &BTreeSet::new());
                        preserved.add_fresh_edge(a, b, d).unwrap();
                    }
                }
            }
        }
        (preserved, l_map)
    } else {
        (lhs.clone(), Homomorphism::identity(&lhs))
    };
    let ps: Vec<ObjectId> = preserved.node_ids().cloned().collect();
    let restrictive = Rule::new(lhs.clone(), preserved.clone(), preserved.clone(), l_map.clone(), Homomorphism::identity(&preserved))
        .expect("restrictive part is a rule");
    if !shape.expansive {
        return (restrictive, m);
    }

    // R: merge at most one pair of P nodes, then add
    let mid = apply_restrictive(host, &restrictive, &m).expect("restrictive part applies");
    let mut class: BTreeMap<ObjectId, usize> = ps.iter().enumerate().map(|(i, p)| (p.clone(), i)).collect();
    if ps.len() >= 2 && rng.gen_bool(0.5) {
        let mut pair = ps.clone();
        pair.shuffle(rng);
        let marks = |p: &ObjectId| mid.graph.node(&mid.matching.node_map[p]).unwrap().mandatory.clone();
        if !shape.no_new_marks || marks(&pair[0]) == marks(&pair[1]) {
            let c = class[&pair[0]];
            class.insert(pair[1].clone(), c);
        }
    }
    let mut rhs = PropertyGraph::new(true);
    let mut r_map = Homomorphism::new();
    for p in &ps {
        let r = id(format!("r{}", class[p]));
        if !rhs.contains_node(&r) {
            rhs.add_node(r.clone(), ElementData::default()).unwrap();
        }
        let d = preserved.node(p).unwrap().clone();
        rhs.merge_data_into(&r, &d).unwrap();
        r_map.insert(p.clone(), r);
    }
    for i in 0..rng.gen_range(0..=2) {
        rhs.add_node(format!("new{i}"), data(rng, !shape.no_new_marks, false)).unwrap();
    }
    let rs: Vec<ObjectId> = rhs.node_ids().cloned().collect();
    for r in &rs {
        if rng.gen_bool(0.3) {
            let extra = data(rng, !shape.no_new_marks, false);
            rhs.merge_data_into(r, &extra).unwrap();
        }
    }
    for (_, e) in preserved.edges() {
        let (a, b) = (&r_map.node_map[&e.source], &r_map.node_map[&e.target]);
        match rhs.edge_between(a, b).cloned() {
            Some(f) => rhs.merge_data_into(&f, &e.data).unwrap(),
            None => {
                rhs.add_fresh_edge(a, b, e.data.clone()).unwrap();
            }
        }
    }
    for a in &rs {
        for b in &rs {
            if !rhs.has_edge_between(a, b) && rng.gen_bool(0.15) {
                rhs.add_fresh_edge(a, b, data(rng, !shape.no_new_marks, false)).unwrap();
            }
        }
    }
    (Rule::new(lhs, preserved, rhs, l_map, r_map).expect("generated span is a rule"), m)
}

/// Keys mandatory on the type of every host node.
pub fn type_marks<'a>(s: &'a PropertyGraph, h: &'a Homomorphism) -> impl Fn(&ObjectId) -> BTreeSet<String> + 'a {
    move |n| s.node(&h.node_map[n]).map(|d| d.mandatory.clone()).unwrap_or_default()
}

pub fn dictionary(rng: &mut Rng8) -> PropertyDictionary {
    data(rng, false, true).props
}
