//! The property-graph data model.
//!
//! A [`PropertyGraph`] houses both instance graphs and schema graphs: nodes
//! and edges drawn from one id space, an endpoint function on edges, a
//! multi-valued property dictionary per element, and a per-element set of
//! mandatory keys which is always a subset of the element's keys.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::GraphError;
use crate::value::Value;

/// Opaque, totally ordered identifier of a node or edge.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ObjectId(String);

impl ObjectId {
    pub fn new(id: impl Into<String>) -> Self {
        ObjectId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ObjectId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for ObjectId {
    fn from(s: &str) -> Self {
        ObjectId(s.to_owned())
    }
}

impl From<String> for ObjectId {
    fn from(s: String) -> Self {
        ObjectId(s)
    }
}

impl From<&ObjectId> for ObjectId {
    fn from(id: &ObjectId) -> Self {
        id.clone()
    }
}

/// Map from property key to a finite (possibly empty) set of values.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PropertyDictionary(BTreeMap<String, BTreeSet<Value>>);

impl PropertyDictionary {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builder-style insertion of a key with its values.
    pub fn with(mut self, key: impl Into<String>, values: impl IntoIterator<Item = Value>) -> Self {
        self.extend_values(key, values);
        self
    }

    pub fn keys(&self) -> impl Iterator<Item = &String> {
        self.0.keys()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &BTreeSet<Value>)> {
        self.0.iter()
    }

    pub fn values(&self, key: &str) -> Option<&BTreeSet<Value>> {
        self.0.get(key)
    }

    pub fn contains_key(&self, key: &str) -> bool {
        self.0.contains_key(key)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Replaces the value set of `key`.
    pub fn set(&mut self, key: impl Into<String>, values: BTreeSet<Value>) {
        self.0.insert(key.into(), values);
    }

    /// Adds values to `key`, creating the key if absent.
    pub fn extend_values(&mut self, key: impl Into<String>, values: impl IntoIterator<Item = Value>) {
        self.0.entry(key.into()).or_default().extend(values);
    }

    pub fn remove_key(&mut self, key: &str) -> Option<BTreeSet<Value>> {
        self.0.remove(key)
    }

    pub fn remove_value(&mut self, key: &str, value: &Value) -> bool {
        self.0.get_mut(key).is_some_and(|set| set.remove(value))
    }

    pub fn union_with(&mut self, other: &PropertyDictionary) {
        for (k, vs) in &other.0 {
            self.0.entry(k.clone()).or_default().extend(vs.iter().cloned());
        }
    }

    /// `self` key-wise contained in `other`: every key present, every value set a subset.
    pub fn is_subdictionary_of(&self, other: &PropertyDictionary) -> bool {
        self.0
            .iter()
            .all(|(k, vs)| other.0.get(k).is_some_and(|ovs| vs.is_subset(ovs)))
    }
}

impl FromIterator<(String, BTreeSet<Value>)> for PropertyDictionary {
    fn from_iter<T: IntoIterator<Item = (String, BTreeSet<Value>)>>(iter: T) -> Self {
        PropertyDictionary(iter.into_iter().collect())
    }
}

/// Key-wise union of two dictionaries; an absent key contributes the empty set.
pub fn dictionary_union(d1: &PropertyDictionary, d2: &PropertyDictionary) -> PropertyDictionary {
    let mut out = d1.clone();
    out.union_with(d2);
    out
}

/// Properties and mandatory marks carried by one node or edge.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ElementData {
    pub props: PropertyDictionary,
    pub mandatory: BTreeSet<String>,
}

impl ElementData {
    pub fn new(props: PropertyDictionary) -> Self {
        ElementData { props, mandatory: BTreeSet::new() }
    }

    /// Marks the given keys mandatory. Keys not present are ignored.
    pub fn with_mandatory<'a>(mut self, keys: impl IntoIterator<Item = &'a str>) -> Self {
        for k in keys {
            if self.props.contains_key(k) {
                self.mandatory.insert(k.to_owned());
            }
        }
        self
    }

    pub fn union_with(&mut self, other: &ElementData) {
        self.props.union_with(&other.props);
        self.mandatory.extend(other.mandatory.iter().cloned());
    }

    pub fn is_mandatory(&self, key: &str) -> bool {
        self.mandatory.contains(key)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Edge {
    pub source: ObjectId,
    pub target: ObjectId,
    pub data: ElementData,
}

/// Elementary graph mutations.
#[derive(Clone, Debug, PartialEq)]
pub enum Mutation {
    AddNode { id: Option<ObjectId>, data: ElementData },
    AddEdge { id: Option<ObjectId>, source: ObjectId, target: ObjectId, data: ElementData },
    DeleteNode(ObjectId),
    DeleteEdge(ObjectId),
    SetProperty { element: ObjectId, key: String, values: BTreeSet<Value> },
    UnsetProperty { element: ObjectId, key: String },
    MarkMandatory { element: ObjectId, key: String },
    UnmarkMandatory { element: ObjectId, key: String },
}

type Adjacency = BTreeMap<ObjectId, BTreeMap<ObjectId, BTreeSet<ObjectId>>>;

/// A property graph `(N, E, η, P, ν, M)`.
#[derive(Clone, Debug)]
pub struct PropertyGraph {
    simple: bool,
    nodes: BTreeMap<ObjectId, ElementData>,
    edges: BTreeMap<ObjectId, Edge>,
    out_adj: Adjacency,
    in_adj: Adjacency,
    next_id: u64,
}

impl Default for PropertyGraph {
    fn default() -> Self {
        PropertyGraph::new(true)
    }
}

impl PartialEq for PropertyGraph {
    fn eq(&self, other: &Self) -> bool {
        self.simple == other.simple && self.nodes == other.nodes && self.edges == other.edges
    }
}

impl Eq for PropertyGraph {}

impl PropertyGraph {
    pub fn new(simple: bool) -> Self {
        PropertyGraph {
            simple,
            nodes: BTreeMap::new(),
            edges: BTreeMap::new(),
            out_adj: BTreeMap::new(),
            in_adj: BTreeMap::new(),
            next_id: 1,
        }
    }

    pub fn is_simple(&self) -> bool {
        self.simple
    }

    /// Starting value of the counter used for generated ids.
    pub fn set_id_counter(&mut self, start: u64) {
        self.next_id = start;
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn node_ids(&self) -> impl Iterator<Item = &ObjectId> {
        self.nodes.keys()
    }

    pub fn edge_ids(&self) -> impl Iterator<Item = &ObjectId> {
        self.edges.keys()
    }

    pub fn nodes(&self) -> impl Iterator<Item = (&ObjectId, &ElementData)> {
        self.nodes.iter()
    }

    pub fn edges(&self) -> impl Iterator<Item = (&ObjectId, &Edge)> {
        self.edges.iter()
    }

    pub fn node(&self, id: &ObjectId) -> Option<&ElementData> {
        self.nodes.get(id)
    }

    pub fn edge(&self, id: &ObjectId) -> Option<&Edge> {
        self.edges.get(id)
    }

    /// Data of a node or an edge.
    pub fn element(&self, id: &ObjectId) -> Option<&ElementData> {
        self.nodes.get(id).or_else(|| self.edges.get(id).map(|e| &e.data))
    }

    fn element_mut(&mut self, id: &ObjectId) -> Result<&mut ElementData, GraphError> {
        if let Some(d) = self.nodes.get_mut(id) {
            return Ok(d);
        }
        self.edges
            .get_mut(id)
            .map(|e| &mut e.data)
            .ok_or_else(|| GraphError::UnknownElement(id.clone()))
    }

    pub fn contains_node(&self, id: &ObjectId) -> bool {
        self.nodes.contains_key(id)
    }

    pub fn contains_edge(&self, id: &ObjectId) -> bool {
        self.edges.contains_key(id)
    }

    pub fn contains(&self, id: &ObjectId) -> bool {
        self.contains_node(id) || self.contains_edge(id)
    }

    /// Edge ids from `source` to `target`, in id order.
    pub fn edges_between<'a>(
        &'a self,
        source: &ObjectId,
        target: &ObjectId,
    ) -> impl Iterator<Item = &'a ObjectId> + 'a {
        self.out_adj
            .get(source)
            .and_then(|m| m.get(target))
            .into_iter()
            .flatten()
    }

    /// The smallest edge id from `source` to `target`; the unique one in simple graphs.
    pub fn edge_between(&self, source: &ObjectId, target: &ObjectId) -> Option<&ObjectId> {
        self.edges_between(source, target).next()
    }

    pub fn has_edge_between(&self, source: &ObjectId, target: &ObjectId) -> bool {
        self.edge_between(source, target).is_some()
    }

    /// `(edge, target)` pairs leaving `node`.
    pub fn out_edges(&self, node: &ObjectId) -> Vec<(ObjectId, ObjectId)> {
        Self::flatten_adj(self.out_adj.get(node))
    }

    /// `(edge, source)` pairs entering `node`.
    pub fn in_edges(&self, node: &ObjectId) -> Vec<(ObjectId, ObjectId)> {
        Self::flatten_adj(self.in_adj.get(node))
    }

    fn flatten_adj(adj: Option<&BTreeMap<ObjectId, BTreeSet<ObjectId>>>) -> Vec<(ObjectId, ObjectId)> {
        adj.into_iter()
            .flat_map(|m| m.iter())
            .flat_map(|(other, es)| es.iter().map(move |e| (e.clone(), other.clone())))
            .collect()
    }

    pub fn successors(&self, node: &ObjectId) -> BTreeSet<ObjectId> {
        self.out_adj
            .get(node)
            .map(|m| m.keys().cloned().collect())
            .unwrap_or_default()
    }

    pub fn predecessors(&self, node: &ObjectId) -> BTreeSet<ObjectId> {
        self.in_adj
            .get(node)
            .map(|m| m.keys().cloned().collect())
            .unwrap_or_default()
    }

    /// A fresh id of the form `{prefix}{k}` using the graph's counter.
    pub fn fresh_id(&mut self, prefix: &str) -> ObjectId {
        loop {
            let candidate = ObjectId(format!("{prefix}{}", self.next_id));
            self.next_id += 1;
            if !self.contains(&candidate) {
                return candidate;
            }
        }
    }

    /// The id given to the next clone of `original`: `n4` becomes `n4_clone1`.
    fn clone_id(&self, original: &ObjectId) -> ObjectId {
        (1..)
            .map(|k| ObjectId(format!("{original}_clone{k}")))
            .find(|c| !self.contains(c))
            .expect("unbounded search")
    }

    pub fn add_node(&mut self, id: impl Into<ObjectId>, data: ElementData) -> Result<ObjectId, GraphError> {
        let id = id.into();
        if self.contains(&id) {
            return Err(GraphError::DuplicateId(id));
        }
        check_mandatory(&id, &data)?;
        self.nodes.insert(id.clone(), data);
        Ok(id)
    }

    pub fn add_fresh_node(&mut self, data: ElementData) -> Result<ObjectId, GraphError> {
        let id = self.fresh_id("n");
        self.add_node(id, data)
    }

    pub fn add_edge(
        &mut self,
        id: impl Into<ObjectId>,
        source: &ObjectId,
        target: &ObjectId,
        data: ElementData,
    ) -> Result<ObjectId, GraphError> {
        let id = id.into();
        if self.contains(&id) {
            return Err(GraphError::DuplicateId(id));
        }
        for end in [source, target] {
            if !self.contains_node(end) {
                return Err(GraphError::UnknownElement(end.clone()));
            }
        }
        if self.simple && self.has_edge_between(source, target) {
            return Err(GraphError::ParallelEdge { from: source.clone(), to: target.clone() });
        }
        check_mandatory(&id, &data)?;
        self.link(&id, source, target);
        self.edges.insert(
            id.clone(),
            Edge { source: source.clone(), target: target.clone(), data },
        );
        Ok(id)
    }

    pub fn add_fresh_edge(
        &mut self,
        source: &ObjectId,
        target: &ObjectId,
        data: ElementData,
    ) -> Result<ObjectId, GraphError> {
        let id = self.fresh_id("e");
        self.add_edge(id, source, target, data)
    }

    fn link(&mut self, id: &ObjectId, source: &ObjectId, target: &ObjectId) {
        self.out_adj
            .entry(source.clone())
            .or_default()
            .entry(target.clone())
            .or_default()
            .insert(id.clone());
        self.in_adj
            .entry(target.clone())
            .or_default()
            .entry(source.clone())
            .or_default()
            .insert(id.clone());
    }

    fn unlink(&mut self, id: &ObjectId, source: &ObjectId, target: &ObjectId) {
        for (adj, a, b) in [
            (&mut self.out_adj, source, target),
            (&mut self.in_adj, target, source),
        ] {
            if let Some(m) = adj.get_mut(a) {
                if let Some(set) = m.get_mut(b) {
                    set.remove(id);
                    if set.is_empty() {
                        m.remove(b);
                    }
                }
                if m.is_empty() {
                    adj.remove(a);
                }
            }
        }
    }

    pub fn remove_edge(&mut self, id: &ObjectId) -> Result<Edge, GraphError> {
        let edge = self
            .edges
            .remove(id)
            .ok_or_else(|| GraphError::UnknownElement(id.clone()))?;
        self.unlink(id, &edge.source, &edge.target);
        Ok(edge)
    }

    /// Removes a node after detaching all incident edges.
    pub fn remove_node(&mut self, id: &ObjectId) -> Result<ElementData, GraphError> {
        if !self.contains_node(id) {
            return Err(GraphError::UnknownElement(id.clone()));
        }
        let incident: BTreeSet<ObjectId> = self
            .out_edges(id)
            .into_iter()
            .chain(self.in_edges(id))
            .map(|(e, _)| e)
            .collect();
        for e in incident {
            self.remove_edge(&e)?;
        }
        Ok(self.nodes.remove(id).expect("checked above"))
    }

    /// Moves an edge to new endpoints, keeping its id and data.
    fn retarget_edge(&mut self, id: &ObjectId, source: &ObjectId, target: &ObjectId) -> Result<(), GraphError> {
        let edge = self.remove_edge(id)?;
        self.add_edge(id.clone(), source, target, edge.data)?;
        Ok(())
    }

    pub fn set_property(
        &mut self,
        element: &ObjectId,
        key: impl Into<String>,
        values: BTreeSet<Value>,
    ) -> Result<(), GraphError> {
        self.element_mut(element)?.props.set(key, values);
        Ok(())
    }

    /// Adds values to a property, creating the key if needed.
    pub fn add_values(
        &mut self,
        element: &ObjectId,
        key: impl Into<String>,
        values: impl IntoIterator<Item = Value>,
    ) -> Result<(), GraphError> {
        self.element_mut(element)?.props.extend_values(key, values);
        Ok(())
    }

    pub fn remove_values<'a>(
        &mut self,
        element: &ObjectId,
        key: &str,
        values: impl IntoIterator<Item = &'a Value>,
    ) -> Result<(), GraphError> {
        let data = self.element_mut(element)?;
        for v in values {
            data.props.remove_value(key, v);
        }
        Ok(())
    }

    /// Removes a key; a mandatory mark on it goes with it.
    pub fn unset_property(&mut self, element: &ObjectId, key: &str) -> Result<bool, GraphError> {
        let data = self.element_mut(element)?;
        data.mandatory.remove(key);
        Ok(data.props.remove_key(key).is_some())
    }

    pub fn mark_mandatory(&mut self, element: &ObjectId, key: &str) -> Result<(), GraphError> {
        let data = self.element_mut(element)?;
        if !data.props.contains_key(key) {
            return Err(GraphError::MandatoryKeyAbsent { element: element.clone(), key: key.to_owned() });
        }
        data.mandatory.insert(key.to_owned());
        Ok(())
    }

    pub fn unmark_mandatory(&mut self, element: &ObjectId, key: &str) -> Result<(), GraphError> {
        self.element_mut(element)?.mandatory.remove(key);
        Ok(())
    }

    /// Unions `data` into the element's dictionary and mandatory set.
    pub fn merge_data_into(&mut self, element: &ObjectId, data: &ElementData) -> Result<(), GraphError> {
        self.element_mut(element)?.union_with(data);
        Ok(())
    }

    /// Applies one elementary mutation and returns the id it affected.
    pub fn apply(&mut self, mutation: Mutation) -> Result<ObjectId, GraphError> {
        match mutation {
            Mutation::AddNode { id, data } => match id {
                Some(id) => self.add_node(id, data),
                None => self.add_fresh_node(data),
            },
            Mutation::AddEdge { id, source, target, data } => match id {
                Some(id) => self.add_edge(id, &source, &target, data),
                None => self.add_fresh_edge(&source, &target, data),
            },
            Mutation::DeleteNode(id) => self.remove_node(&id).map(|_| id),
            Mutation::DeleteEdge(id) => self.remove_edge(&id).map(|_| id),
            Mutation::SetProperty { element, key, values } => {
                self.set_property(&element, key, values).map(|_| element)
            }
            Mutation::UnsetProperty { element, key } => {
                self.unset_property(&element, &key).map(|_| element)
            }
            Mutation::MarkMandatory { element, key } => {
                self.mark_mandatory(&element, &key).map(|_| element)
            }
            Mutation::UnmarkMandatory { element, key } => {
                self.unmark_mandatory(&element, &key).map(|_| element)
            }
        }
    }

    /// Clones a node together with its dictionary, mandatory marks and
    /// every incident edge. A self-loop on `n` yields a loop on the clone and
    /// the two cross edges between clone and original.
    pub fn clone_node(&mut self, n: &ObjectId) -> Result<ObjectId, GraphError> {
        let data = self
            .nodes
            .get(n)
            .cloned()
            .ok_or_else(|| GraphError::UnknownElement(n.clone()))?;
        let clone = self.clone_id(n);
        self.add_node(clone.clone(), data)?;

        let outgoing = self.out_edges(n);
        let incoming = self.in_edges(n);
        for (e, succ) in &outgoing {
            let target = if succ == n { n } else { succ };
            self.copy_edge(e, &clone, target)?;
        }
        for (e, pred) in &incoming {
            let source = if pred == n { n } else { pred };
            self.copy_edge(e, source, &clone)?;
        }
        for (e, succ) in &outgoing {
            if succ == n {
                self.copy_edge(e, &clone, &clone)?;
            }
        }
        Ok(clone)
    }

    fn copy_edge(&mut self, original: &ObjectId, source: &ObjectId, target: &ObjectId) -> Result<ObjectId, GraphError> {
        let data = self.edges[original].data.clone();
        let id = self.clone_id(original);
        self.add_edge(id, source, target, data)
    }

    /// Merges `m` into `n`; `n` survives with the union of both dictionaries.
    ///
    /// In simple graphs parallel edges towards a shared neighbour are unified,
    /// and all edges among `{n, m}` collapse into at most one self-loop on `n`
    /// carrying the union of their dictionaries. In non-simple graphs the
    /// edges of `m` are re-attached to `n` unchanged.
    pub fn merge_nodes(&mut self, n: &ObjectId, m: &ObjectId) -> Result<ObjectId, GraphError> {
        for x in [n, m] {
            if !self.contains_node(x) {
                return Err(GraphError::UnknownElement(x.clone()));
            }
        }
        if n == m {
            return Err(GraphError::SameNode(n.clone()));
        }
        let m_data = self.nodes[m].clone();
        self.nodes.get_mut(n).expect("checked").union_with(&m_data);

        if self.simple {
            let mut loops = Vec::new();
            for (e, succ) in self.out_edges(m) {
                if &succ == n || &succ == m {
                    loops.push(e);
                } else {
                    self.unify_or_retarget(&e, n, &succ)?;
                }
            }
            for (e, pred) in self.in_edges(m) {
                if &pred == m {
                    continue;
                }
                if &pred == n {
                    loops.push(e);
                } else {
                    self.unify_or_retarget(&e, &pred, n)?;
                }
            }
            if !loops.is_empty() {
                loops.sort();
                let keeper = match self.edge_between(n, n).cloned() {
                    Some(existing) => existing,
                    None => {
                        let first = loops.remove(0);
                        self.retarget_edge(&first, n, n)?;
                        first
                    }
                };
                for e in loops {
                    let removed = self.remove_edge(&e)?;
                    self.edges.get_mut(&keeper).expect("keeper").data.union_with(&removed.data);
                }
            }
        } else {
            for (e, succ) in self.out_edges(m) {
                let target = if &succ == m { n.clone() } else { succ };
                self.retarget_edge(&e, n, &target)?;
            }
            for (e, pred) in self.in_edges(m) {
                if &pred != m {
                    self.retarget_edge(&e, &pred, n)?;
                }
            }
        }
        self.remove_node(m)?;
        Ok(n.clone())
    }

    fn unify_or_retarget(&mut self, e: &ObjectId, source: &ObjectId, target: &ObjectId) -> Result<(), GraphError> {
        match self.edge_between(source, target).cloned() {
            Some(existing) => {
                let removed = self.remove_edge(e)?;
                self.edges.get_mut(&existing).expect("exists").data.union_with(&removed.data);
                Ok(())
            }
            None => self.retarget_edge(e, source, target),
        }
    }

    pub fn from_json(text: &str) -> Result<Self, GraphError> {
        let file: GraphFile = serde_json::from_str(text).map_err(|e| GraphError::Json(e.to_string()))?;
        file.try_into()
    }

    pub fn from_json_value(value: serde_json::Value) -> Result<Self, GraphError> {
        let file: GraphFile = serde_json::from_value(value).map_err(|e| GraphError::Json(e.to_string()))?;
        file.try_into()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&GraphFile::from(self)).expect("graph serializes")
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(&GraphFile::from(self)).expect("graph serializes")
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::to_value(GraphFile::from(self)).expect("graph serializes")
    }
}

impl Serialize for PropertyGraph {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        GraphFile::from(self).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for PropertyGraph {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let file = GraphFile::deserialize(deserializer)?;
        file.try_into().map_err(serde::de::Error::custom)
    }
}

fn check_mandatory(id: &ObjectId, data: &ElementData) -> Result<(), GraphError> {
    match data.mandatory.iter().find(|k| !data.props.contains_key(k.as_str())) {
        Some(k) => Err(GraphError::MandatoryKeyAbsent { element: id.clone(), key: k.clone() }),
        None => Ok(()),
    }
}

#[derive(Serialize, Deserialize)]
struct GraphFile {
    #[serde(default = "default_simple")]
    simple: bool,
    #[serde(default)]
    nodes: Vec<NodeRecord>,
    #[serde(default)]
    edges: Vec<EdgeRecord>,
}

fn default_simple() -> bool {
    true
}

#[derive(Serialize, Deserialize)]
struct NodeRecord {
    id: ObjectId,
    #[serde(default)]
    props: PropertyDictionary,
    #[serde(default)]
    mandatory: BTreeSet<String>,
}

#[derive(Serialize, Deserialize)]
struct EdgeRecord {
    id: ObjectId,
    source: ObjectId,
    target: ObjectId,
    #[serde(default)]
    props: PropertyDictionary,
    #[serde(default)]
    mandatory: BTreeSet<String>,
}

impl From<&PropertyGraph> for GraphFile {
    fn from(g: &PropertyGraph) -> Self {
        GraphFile {
            simple: g.simple,
            nodes: g
                .nodes
                .iter()
                .map(|(id, d)| NodeRecord { id: id.clone(), props: d.props.clone(), mandatory: d.mandatory.clone() })
                .collect(),
            edges: g
                .edges
                .iter()
                .map(|(id, e)| EdgeRecord {
                    id: id.clone(),
                    source: e.source.clone(),
                    target: e.target.clone(),
                    props: e.data.props.clone(),
                    mandatory: e.data.mandatory.clone(),
                })
                .collect(),
        }
    }
}

impl TryFrom<GraphFile> for PropertyGraph {
    type Error = GraphError;

    fn try_from(file: GraphFile) -> Result<Self, Self::Error> {
        let mut g = PropertyGraph::new(file.simple);
        for n in file.nodes {
            g.add_node(n.id, ElementData { props: n.props, mandatory: n.mandatory })?;
        }
        for e in file.edges {
            g.add_edge(e.id, &e.source, &e.target, ElementData { props: e.props, mandatory: e.mandatory })?;
        }
        Ok(g)
    }
}
