//! A tiny interpreter for the emitted clone and merge templates: each
//! recognised section is executed against a graph whose nodes carry an `id`
//! property.

use pgse_core::codegen::QueryText;
use pgse_core::graph::{ElementData, ObjectId, PropertyDictionary, PropertyGraph};
use pgse_core::Value;
use regex::Regex;
fn find(g: &PropertyGraph, text: &str, var: &str) -> ObjectId {
    let re = Regex::new(&format!(r"\({var} \{{ id : '([^']*)' \}}\)")).unwrap();
    let value = &re.captures(text).expect("selector")[1];
    g.nodes()
        .find(|(_, d)| d.props.values("id").is_some_and(|v| v.contains(&Value::str(value))))
        .map(|(n, _)| n.clone())
        .expect("selected node")
}

fn edge_data(g: &PropertyGraph, e: &ObjectId) -> ElementData {
    g.edge(e).unwrap().data.clone()
}

pub fn run_clone(q: &QueryText, g: &mut PropertyGraph) {
    let a = find(g, &q.section("match").unwrap().text, "a");
    let has = |name: &str, pat: &str| q.section(name).is_some_and(|s| squeeze(&s.text).contains(&squeeze(pat)));
    assert!(has("create-clone", "CREATE (a1) WITH a, a1 SET a1 = a"));
    let a1 = g.add_node("copy", g.node(&a).unwrap().clone()).unwrap();
    let outs = g.out_edges(&a);
    let ins = g.in_edges(&a);
    if has("copy-out-edges", "CREATE (a1)-[new_edge:edge]->(suc) SET new_edge = suc_map.edge") {
        for (e, s) in &outs {
            g.add_fresh_edge(&a1, s, edge_data(g, e)).unwrap();
        }
    }
    if has("copy-in-edges", "CREATE (pred)-[new_edge:edge]->(a1) SET new_edge = pred_map.edge") {
        for (e, p) in &ins {
            g.add_fresh_edge(p, &a1, edge_data(g, e)).unwrap();
        }
    }
    if has("copy-self-loops", "CASE WHEN suc_map.neighbor=a THEN [suc_map.edge]") {
        for (e, s) in &outs {
            if s == &a {
                g.add_fresh_edge(&a1, &a1, edge_data(g, e)).unwrap();
            }
        }
    }
}

pub fn run_merge(q: &QueryText, g: &mut PropertyGraph) {
    let m = &q.section("match").unwrap().text;
    let (a, b) = (find(g, m, "a"), find(g, m, "b"));
    let has = |name: &str, pat: &str| q.section(name).is_some_and(|s| squeeze(&s.text).contains(&squeeze(pat)));
    if has("merge-props", "a[key] + filter(el IN b[key] WHERE NOT el in a[key])") {
        let bd = g.node(&b).unwrap().props.clone();
        for (k, vals) in bd.iter() {
            g.add_values(&a, k, vals.iter().cloned()).unwrap();
        }
    }
    let outs = g.out_edges(&b);
    let ins = g.in_edges(&b);
    let merged = [a.clone(), b.clone()];
    let mut loops = Vec::new();
    let merge_into = |g: &mut PropertyGraph, s: &ObjectId, t: &ObjectId, d: ElementData| match g.edge_between(s, t).cloned() {
        Some(e) => {
            for (k, vals) in d.props.iter() {
                g.add_values(&e, k, vals.iter().cloned()).unwrap();
            }
        }
        None => {
            g.add_fresh_edge(s, t, d).unwrap();
        }
    };
    if has("merge-out-edges", "MERGE (merged_node)-[edge:edge]->(suc)") {
        for (e, s) in &outs {
            if merged.contains(s) {
                loops.push(edge_data(g, e));
            } else {
                merge_into(g, &a, s, edge_data(g, e));
            }
        }
    }
    if has("merge-in-edges", "MERGE (pred)-[edge:edge]->(merged_node)") {
        for (e, p) in &ins {
            if merged.contains(p) {
                loops.push(edge_data(g, e));
            } else {
                merge_into(g, p, &a, edge_data(g, e));
            }
        }
    }
    if has("handle-loops", "MERGE (merged_node)-[ old_loop:edge]->(merged_node)")
        && (g.has_edge_between(&a, &a) || !loops.is_empty())
    {
        let mut d = ElementData::default();
        for l in &loops {
            d.props.union_with(&l.props);
        }
        merge_into(g, &a, &a, d);
    }
    if has("retarget-out-edges", "CREATE (merged_node)-[new_edge:edge]->(suc)") {
        for (e, s) in &outs {
            let t = if s == &b { &a } else { s };
            g.add_fresh_edge(&a, t, edge_data(g, e)).unwrap();
        }
    }
    if has("retarget-in-edges", "CREATE (pred)-[new_edge:edge]->(merged_node)") {
        for (e, p) in &ins {
            if p != &b {
                g.add_fresh_edge(p, &a, edge_data(g, e)).unwrap();
            }
        }
    }
    if has("delete", "DETACH DELETE b") {
        g.remove_node(&b).unwrap();
    }
}

fn node(id: &str, extra: &[(&str, &str)]) -> ElementData {
    let mut props = PropertyDictionary::new().with("id", [Value::str(id)]);
    for (k, v) in extra {
        props = props.with(*k, [Value::str(*v)]);
    }
    ElementData::new(props)
}

fn weight(w: &str) -> ElementData {
    ElementData::new(PropertyDictionary::new().with("w", [Value::str(w)]))
}

/// Three graphs on nodes a, b, c: a path, a triangle with loops, and a graph
/// with edges both ways between a and b.
pub fn test_graphs(simple: bool) -> Vec<PropertyGraph> {
    let base = |edges: &[(&str, &str, &str)]| {
        let mut g = PropertyGraph::new(simple);
        g.add_node("a", node("a", &[("k", "1")])).unwrap();
        g.add_node("b", node("b", &[("k", "2"), ("j", "x")])).unwrap();
        g.add_node("c", node("c", &[])).unwrap();
        for (s, t, w) in edges {
            g.add_fresh_edge(&ObjectId::new(*s), &ObjectId::new(*t), weight(w)).unwrap();
        }
        g
    };
    vec![
        base(&[("a", "b", "1"), ("b", "c", "2")]),
        base(&[("a", "b", "1"), ("b", "c", "2"), ("c", "a", "3"), ("a", "a", "4"), ("b", "b", "5")]),
        base(&[("a", "b", "1"), ("b", "a", "2"), ("a", "c", "3"), ("b", "c", "4"), ("c", "b", "5")]),
    ]
}

fn squeeze(s: &str) -> String {
    s.chars().filter(|c| !c.is_whitespace()).collect()
}
