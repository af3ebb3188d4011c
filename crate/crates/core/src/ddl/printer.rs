use std::fmt::Write;

use super::types::{EdgeType, ElementType, GraphType};

/// Canonical DDL text: element types by label, then node types, then edge
/// types, properties by key.
pub fn print_ddl(gt: &GraphType) -> String {
    let mut elements: Vec<&ElementType> = gt.element_types.iter().collect();
    elements.sort_by(|a, b| a.label.cmp(&b.label));
    let mut nodes: Vec<&str> = gt.node_types.iter().map(|n| n.element.as_str()).collect();
    nodes.sort();
    let mut edges: Vec<&EdgeType> = gt.edge_types.iter().collect();
    edges.sort();

    let mut items: Vec<String> = Vec::new();
    for et in elements {
        items.push(element_line(et));
    }
    for n in nodes {
        items.push(format!("({n})"));
    }
    for e in edges {
        let card = e.cardinality.map(|c| format!("<{c}>")).unwrap_or_default();
        items.push(format!("({})-[{}]->{card}({})", e.source, e.element, e.target));
    }

    let mut out = format!("CREATE GRAPH TYPE {} (\n", gt.name);
    let n = items.len();
    for (i, item) in items.into_iter().enumerate() {
        out.push_str("  ");
        out.push_str(&item);
        if i + 1 < n {
            out.push(',');
        }
        out.push('\n');
    }
    out.push(')');
    out
}

fn element_line(et: &ElementType) -> String {
    let mut s = String::new();
    if et.is_final {
        s.push_str("FINAL ");
    }
    s.push_str(&et.label);
    if !et.extends.is_empty() {
        let mut parents = et.extends.clone();
        parents.sort();
        write!(s, " <: {}", parents.join(" & ")).unwrap();
    }
    let mut props = et.properties.clone();
    props.sort();
    if props.is_empty() {
        s.push_str(" {}");
    } else {
        let body: Vec<String> = props
            .iter()
            .map(|p| format!("{} : {}{}", p.key, p.data_type, if p.optional { "?" } else { "" }))
            .collect();
        write!(s, " {{ {} }}", body.join(", ")).unwrap();
    }
    s
}
