//! Interpretation of a graph type as a schema property graph.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::DdlError;
use crate::graph::{ElementData, ObjectId, PropertyDictionary, PropertyGraph};
use crate::hom::ValueMode;

use super::check::{check_graph_type, Diagnostic};
use super::types::{Exposed, GraphType};

/// Labels of schema elements. Schema graphs are unlabelled; this index is
/// where node-type and edge-type names live.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TypeIndex {
    /// Node-type label to schema node.
    pub nodes: BTreeMap<String, ObjectId>,
    /// Schema edge to edge-type label.
    pub edges: BTreeMap<ObjectId, String>,
}

impl TypeIndex {
    pub fn node(&self, label: &str) -> Option<&ObjectId> {
        self.nodes.get(label)
    }

    pub fn label_of(&self, node: &ObjectId) -> Option<&str> {
        self.nodes.iter().find(|(_, id)| *id == node).map(|(l, _)| l.as_str())
    }

    pub fn edge_label(&self, edge: &ObjectId) -> Option<&str> {
        self.edges.get(edge).map(String::as_str)
    }

    pub fn from_json(text: &str) -> Result<Self, DdlError> {
        serde_json::from_str(text).map_err(|e| DdlError::MalformedSchema(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("index serializes")
    }
}

pub(crate) struct ExpandedEdge {
    pub source: String,
    pub target: String,
    pub edge_type: usize,
}

/// Schema edges of each edge type, in document order, with collisions.
pub(crate) fn expand_edges(gt: &GraphType) -> (Vec<ExpandedEdge>, Vec<Diagnostic>) {
    let node_labels: Vec<(&str, BTreeSet<String>)> = gt
        .node_types
        .iter()
        .map(|n| (n.element.as_str(), gt.exposed_labels(&n.element)))
        .collect();
    let mut taken: BTreeMap<(String, String), usize> = BTreeMap::new();
    let mut edges = Vec::new();
    let mut diags = Vec::new();
    for (i, et) in gt.edge_types.iter().enumerate() {
        for (n1, l1) in &node_labels {
            if !l1.contains(&et.source) {
                continue;
            }
            for (n2, l2) in &node_labels {
                if !l2.contains(&et.target) {
                    continue;
                }
                let pair = (n1.to_string(), n2.to_string());
                if let Some(&j) = taken.get(&pair) {
                    diags.push(Diagnostic::EdgeCollision {
                        source: pair.0,
                        target: pair.1,
                        kept: gt.edge_types[j].element.clone(),
                        dropped: et.element.clone(),
                    });
                    continue;
                }
                taken.insert(pair.clone(), i);
                edges.push(ExpandedEdge { source: pair.0, target: pair.1, edge_type: i });
            }
        }
    }
    (edges, diags)
}

pub fn schema_edge_id(source: &str, label: &str, target: &str) -> ObjectId {
    ObjectId::new(format!("{source}-{label}->{target}"))
}

fn element_data(exposed: &Exposed, mode: ValueMode) -> ElementData {
    let mut props = PropertyDictionary::new();
    for p in &exposed.properties {
        let values = match mode {
            ValueMode::Symbolic => BTreeSet::from([p.data_type.token()]),
            ValueMode::Extensional => BTreeSet::new(),
        };
        props.set(p.key.clone(), values);
    }
    ElementData {
        props,
        mandatory: exposed.mandatory().into_iter().map(|p| p.key).collect(),
    }
}

/// Schema graph of a valid graph type. Edge collisions are an error.
pub fn graph_type_to_schema(gt: &GraphType, mode: ValueMode) -> Result<(PropertyGraph, TypeIndex), DdlError> {
    graph_type_to_schema_with(gt, mode, false)
}

/// As [`graph_type_to_schema`]; with `force`, colliding edge types are
/// resolved in favour of the first one in document order.
pub fn graph_type_to_schema_with(
    gt: &GraphType,
    mode: ValueMode,
    force: bool,
) -> Result<(PropertyGraph, TypeIndex), DdlError> {
    let diags = check_graph_type(gt);
    if !diags.is_empty() {
        return Err(DdlError::Invalid(diags));
    }
    let (edges, collisions) = expand_edges(gt);
    if !force && !collisions.is_empty() {
        return Err(DdlError::Invalid(collisions));
    }

    let mut schema = PropertyGraph::new(true);
    let mut index = TypeIndex::default();
    for nt in &gt.node_types {
        let exposed = gt.exposed(&nt.element)?;
        let id = schema
            .add_node(nt.element.as_str(), element_data(&exposed, mode))
            .map_err(|e| DdlError::MalformedSchema(e.to_string()))?;
        index.nodes.insert(nt.element.clone(), id);
    }
    for e in edges {
        let et = &gt.edge_types[e.edge_type];
        let exposed = gt.exposed(&et.element)?;
        let id = schema_edge_id(&e.source, &et.element, &e.target);
        schema
            .add_edge(
                id.clone(),
                &index.nodes[&e.source],
                &index.nodes[&e.target],
                element_data(&exposed, mode),
            )
            .map_err(|e| DdlError::MalformedSchema(e.to_string()))?;
        index.edges.insert(id, et.element.clone());
    }
    Ok((schema, index))
}
