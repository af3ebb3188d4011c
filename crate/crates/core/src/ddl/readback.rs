//! Reading a schema graph back as a graph type.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::DdlError;
use crate::graph::{ElementData, PropertyGraph};
use crate::rewrite::derive_actions;
use crate::smo::{AuditTrail, UNLABELLED_EDGE};
use crate::value::{DataType, Value};

use super::bridge::TypeIndex;
use super::check::check_graph_type;
use super::types::{EdgeType, ElementType, GraphType, NodeType, PropertyType};

type Props = BTreeMap<String, PropertyType>;

fn malformed(msg: impl Into<String>) -> DdlError {
    DdlError::MalformedSchema(msg.into())
}

fn declared_type(origin: Option<&GraphType>, key: &str) -> Option<DataType> {
    let declared: BTreeSet<DataType> = origin?
        .element_types
        .iter()
        .flat_map(|e| &e.properties)
        .filter(|p| p.key == key)
        .map(|p| p.data_type)
        .collect();
    (declared.len() == 1).then(|| *declared.iter().next().expect("one"))
}

fn data_type(values: &BTreeSet<Value>, key: &str, origin: Option<&GraphType>) -> Result<DataType, DdlError> {
    let tokens: BTreeSet<DataType> = values.iter().filter_map(Value::as_type_token).collect();
    if tokens.len() > 1 {
        return Err(malformed(format!("`{key}` carries several type tokens")));
    }
    if let Some(t) = tokens.into_iter().next() {
        return Ok(t);
    }
    if let Some(t) = declared_type(origin, key) {
        return Ok(t);
    }
    let tags: BTreeSet<DataType> = values.iter().map(|v| DataType::for_tag(v.tag())).collect();
    match tags.len() {
        0 => Ok(DataType::String),
        1 => Ok(tags.into_iter().next().expect("one")),
        _ => Err(malformed(format!("`{key}` mixes values of several types"))),
    }
}

fn props_of(data: &ElementData, origin: Option<&GraphType>) -> Result<Props, DdlError> {
    data.props
        .iter()
        .map(|(k, vals)| {
            let t = data_type(vals, k, origin)?;
            Ok((k.clone(), PropertyType::new(k.clone(), t, !data.is_mandatory(k))))
        })
        .collect()
}

/// Direct parents of each label, seeded from the origin's abstract element
/// types and extended by every clone in the trail.
fn lineage(trail: &AuditTrail) -> Result<BTreeMap<String, BTreeSet<String>>, DdlError> {
    let mut parents: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    if let Some(gt) = &trail.origin_type {
        let concrete: BTreeSet<&str> = gt.node_types.iter().map(|n| n.element.as_str()).collect();
        for et in &gt.element_types {
            for p in &et.extends {
                if !concrete.contains(p.as_str()) {
                    parents.entry(et.label.clone()).or_default().insert(p.clone());
                }
            }
        }
    }
    let apps = trail.applications().map_err(|e| DdlError::UnsupportedHistory(e.to_string()))?;
    for (j, (entry, app)) in trail.entries.iter().zip(&apps).enumerate() {
        let plan = derive_actions(&entry.rule);
        if !plan.node_deletes.is_empty() {
            return Err(DdlError::UnsupportedHistory(format!("entry {j} deletes a type")));
        }
        if !plan.merges.is_empty() {
            return Err(DdlError::UnsupportedHistory(format!("entry {j} merges types")));
        }
        let before = trail.index_at(j);
        for (x, _) in &plan.clones {
            let host = &entry.matching.node_map[x];
            let parent = before.label_of(host).unwrap_or(host.as_str()).to_owned();
            for p in entry.rule.l_map.preimage(x) {
                let image = &app.expanded.fwd_map.node_map[&app.restricted.matching.node_map[&p]];
                let child = entry.index.label_of(image).unwrap_or(image.as_str()).to_owned();
                if child == parent {
                    return Err(DdlError::UnsupportedHistory(format!("`{parent}` is split into itself")));
                }
                parents.entry(child).or_default().insert(parent.clone());
            }
        }
    }
    Ok(parents)
}

fn ancestors(label: &str, parents: &BTreeMap<String, BTreeSet<String>>) -> BTreeSet<String> {
    let mut seen = BTreeSet::new();
    let mut stack = vec![label.to_owned()];
    while let Some(l) = stack.pop() {
        for p in parents.get(&l).into_iter().flatten() {
            if seen.insert(p.clone()) {
                stack.push(p.clone());
            }
        }
    }
    seen
}

/// Greedily replaces edge types towards (or from) every concrete descendant
/// of an abstract label by one edge type on that label.
fn compact(
    mut edges: BTreeSet<(String, String, String)>,
    abstract_desc: &[(String, BTreeSet<String>)],
    on_target: bool,
) -> BTreeSet<(String, String, String)> {
    for (a, desc) in abstract_desc {
        let groups: BTreeSet<(String, String)> = edges
            .iter()
            .map(|(s, l, t)| if on_target { (s.clone(), l.clone()) } else { (t.clone(), l.clone()) })
            .collect();
        for (other, label) in groups {
            let key = |d: &String| {
                if on_target {
                    (other.clone(), label.clone(), d.clone())
                } else {
                    (d.clone(), label.clone(), other.clone())
                }
            };
            if desc.iter().all(|d| edges.contains(&key(d))) {
                for d in desc {
                    edges.remove(&key(d));
                }
                edges.insert(key(a));
            }
        }
    }
    edges
}

/// Reads a schema graph back as a graph type.
///
/// Without a trail the result is flat: one element type per labelled node.
/// With a trail, every clone contributes an inheritance edge from the cloned
/// type to its parts, and properties shared by all parts move up to the
/// parent. Trails that delete or merge types cannot be read back.
pub fn schema_to_graph_type(
    schema: &PropertyGraph,
    index: &TypeIndex,
    trail: Option<&AuditTrail>,
) -> Result<GraphType, DdlError> {
    let origin = trail.and_then(|t| t.origin_type.as_ref());
    let parents = match trail {
        Some(t) => lineage(t)?,
        None => BTreeMap::new(),
    };

    let mut exposed: BTreeMap<String, Props> = BTreeMap::new();
    for (label, id) in &index.nodes {
        let data = schema.node(id).ok_or_else(|| malformed(format!("`{label}` names no schema node")))?;
        exposed.insert(label.clone(), props_of(data, origin)?);
    }
    for n in schema.node_ids() {
        if index.label_of(n).is_none() {
            return Err(malformed(format!("schema node `{n}` has no label")));
        }
    }
    let concrete: BTreeSet<String> = index.nodes.keys().cloned().collect();

    // abstract labels with the concrete labels below them
    let mut desc: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    for c in &concrete {
        for a in ancestors(c, &parents) {
            if !concrete.contains(&a) {
                desc.entry(a).or_default().insert(c.clone());
            }
        }
    }
    for (a, below) in &desc {
        let mut shared: Option<Props> = None;
        for c in below {
            let p = &exposed[c];
            shared = Some(match shared {
                None => p.clone(),
                Some(s) => s.into_iter().filter(|(k, t)| p.get(k) == Some(t)).collect(),
            });
        }
        exposed.insert(a.clone(), shared.unwrap_or_default());
    }

    let mut gt = GraphType::new(origin.map(|g| g.name.clone()).unwrap_or_else(|| "schema".into()));
    let is_final = |l: &str| origin.and_then(|g| g.element(l)).is_some_and(|e| e.is_final);
    for (label, props) in &exposed {
        let ps: BTreeSet<&String> = parents.get(label).into_iter().flatten().filter(|p| exposed.contains_key(*p)).collect();
        let inherited: Props = ps
            .iter()
            .flat_map(|p| exposed[*p].iter().map(|(k, t)| (k.clone(), t.clone())))
            .collect();
        let mut et = ElementType::new(label.clone());
        et.properties = props.values().filter(|t| inherited.get(&t.key) != Some(*t)).cloned().collect();
        et.extends = ps.into_iter().cloned().collect();
        et.is_final = is_final(label);
        gt.element_types.push(et);
    }
    gt.node_types = concrete.iter().map(|l| NodeType { element: l.clone() }).collect();

    let mut edge_props: BTreeMap<String, Props> = BTreeMap::new();
    let mut raw = BTreeSet::new();
    for (e, edge) in schema.edges() {
        let label = index.edge_label(e).unwrap_or(UNLABELLED_EDGE).to_owned();
        let props = props_of(&edge.data, origin)?;
        if let Some(prev) = edge_props.get(&label) {
            if prev != &props {
                return Err(malformed(format!("edges labelled `{label}` disagree on their properties")));
            }
        }
        edge_props.insert(label.clone(), props);
        let src = index.label_of(&edge.source).expect("labelled above").to_owned();
        let tgt = index.label_of(&edge.target).expect("labelled above").to_owned();
        raw.insert((src, label, tgt));
    }
    let mut order: Vec<(String, BTreeSet<String>)> = desc.into_iter().collect();
    order.sort_by(|a, b| b.1.len().cmp(&a.1.len()).then_with(|| a.0.cmp(&b.0)));
    let edges = compact(compact(raw, &order, true), &order, false);
    for (label, props) in edge_props {
        if !props.is_empty() || origin.is_some_and(|g| g.element(&label).is_some()) {
            if gt.element(&label).is_some() {
                return Err(malformed(format!("`{label}` labels both nodes and edges")));
            }
            let mut et = ElementType::new(label.clone());
            et.properties = props.into_values().collect();
            et.is_final = is_final(&label);
            gt.element_types.push(et);
        }
    }
    gt.edge_types = edges.into_iter().map(|(s, l, t)| EdgeType::new(s, l, t)).collect();

    let diags = check_graph_type(&gt);
    if !diags.is_empty() {
        return Err(DdlError::Invalid(diags));
    }
    Ok(gt)
}
