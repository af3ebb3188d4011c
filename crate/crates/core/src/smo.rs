//! Schema manipulation operations compiled to rewriting rules, the audit
//! trail of schema rewrites, and an executor keeping an instance and its
//! schema consistent.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::ddl::{GraphType, TypeIndex};
use crate::error::{PropagationError, SmoError};
use crate::graph::{ElementData, ObjectId, PropertyDictionary, PropertyGraph};
use crate::hom::{check_homomorphism, compose, Homomorphism, ValidationReport, ValueMode};
use crate::propagation::{controlled_propagate_to_instance, controlled_propagate_to_schema, PropagationRelation};
use crate::rewrite::{apply_rule, derive_actions, EditAction, Matching, Rule, RuleApplication};
use crate::value::{DataType, Value};

/// Which side of the hierarchy a manipulation rewrites first.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    /// Rewrite the schema; the data follows.
    #[default]
    SchemaToData,
    /// Rewrite the data; the schema follows.
    DataToSchema,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PropertySpec {
    pub key: String,
    #[serde(rename = "type", default, skip_serializing_if = "Option::is_none")]
    pub data_type: Option<DataType>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub values: Vec<Value>,
    #[serde(default)]
    pub mandatory: bool,
}

impl PropertySpec {
    /// The value set this property has on a schema node.
    fn schema_values(&self, mode: ValueMode) -> BTreeSet<Value> {
        let mut out: BTreeSet<Value> = self.values.iter().cloned().collect();
        if mode == ValueMode::Symbolic && (self.data_type.is_some() || out.is_empty()) {
            out.insert(self.data_type.unwrap_or(DataType::String).token());
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeSpec {
    pub label: String,
    pub source: String,
    pub target: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SmoOp {
    /// A new node type, optionally with edges to or from existing types.
    Create {
        label: String,
        #[serde(default)]
        properties: Vec<PropertySpec>,
        #[serde(default)]
        edges: Vec<EdgeSpec>,
    },
    Drop {
        target: String,
    },
    /// Relabels a node or edge type.
    Rename {
        target: String,
        to: String,
    },
    /// Adds or removes properties of a type. With the data-to-schema
    /// direction the additions are made on the listed instance nodes.
    Change {
        target: String,
        #[serde(default)]
        add: Vec<PropertySpec>,
        #[serde(default)]
        remove: Vec<String>,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        instances: Vec<ObjectId>,
    },
    /// Partitions a type into subtypes. `drop` removes keys from a part,
    /// `restrict` narrows a part's value set, and `loops` lists the edges kept
    /// among the parts when the type has a self-loop (all by default).
    Split {
        target: String,
        into: Vec<String>,
        #[serde(default)]
        drop: BTreeMap<String, Vec<String>>,
        #[serde(default)]
        restrict: BTreeMap<String, BTreeMap<String, BTreeSet<Value>>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        loops: Option<Vec<(String, String)>>,
    },
    Union {
        targets: Vec<String>,
        into: String,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchemaManipulation {
    #[serde(flatten)]
    pub op: SmoOp,
    #[serde(default)]
    pub direction: Direction,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub relation: Option<PropagationRelation>,
}

impl SchemaManipulation {
    pub fn new(op: SmoOp) -> Self {
        SchemaManipulation { op, direction: Direction::SchemaToData, relation: None }
    }

    pub fn from_json(text: &str) -> Result<Self, SmoError> {
        serde_json::from_str(text).map_err(|e| SmoError::Json(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("smo serializes")
    }
}

/// A compiled manipulation together with the label changes it implies.
/// Label targets are node and edge ids of the rule's right-hand side.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Compiled {
    pub rule: Rule,
    pub matching: Matching,
    pub relation: Option<PropagationRelation>,
    pub new_labels: BTreeMap<String, ObjectId>,
    pub removed_labels: Vec<String>,
    pub edge_labels: BTreeMap<ObjectId, String>,
}

impl Compiled {
    fn plain(rule: Rule, matching: Matching) -> Self {
        Compiled {
            rule,
            matching,
            relation: None,
            new_labels: BTreeMap::new(),
            removed_labels: Vec::new(),
            edge_labels: BTreeMap::new(),
        }
    }
}

fn resolve<'a>(index: &'a TypeIndex, label: &str) -> Result<&'a ObjectId, SmoError> {
    index.node(label).ok_or_else(|| SmoError::UnknownTarget(label.to_owned()))
}

fn invalid(msg: impl Into<String>) -> SmoError {
    SmoError::InvalidPayload(msg.into())
}

fn single(id: &str, data: ElementData) -> PropertyGraph {
    let mut g = PropertyGraph::new(true);
    g.add_node(id, data).expect("fresh graph");
    g
}

/// Compiles a manipulation into a rule and a matching into `g`: the schema
/// for the schema-to-data direction, the instance otherwise.
pub fn compile_smo(
    smo: &SchemaManipulation,
    g: &PropertyGraph,
    index: &TypeIndex,
    mode: ValueMode,
) -> Result<Compiled, SmoError> {
    if smo.direction == Direction::DataToSchema {
        return compile_instance_change(smo, g, mode);
    }
    let mut compiled = match &smo.op {
        SmoOp::Create { label, properties, edges } => compile_create(label, properties, edges, index, mode)?,
        SmoOp::Drop { target } => {
            let t = resolve(index, target)?;
            let empty = PropertyGraph::new(true);
            let rule = Rule::new(single(target, ElementData::default()), empty.clone(), empty, Homomorphism::new(), Homomorphism::new())?;
            let mut c = Compiled::plain(rule, Homomorphism::from_pairs([(target.as_str(), t)]));
            c.removed_labels.push(target.clone());
            c
        }
        SmoOp::Rename { .. } => {
            let empty = PropertyGraph::new(true);
            Compiled::plain(Rule::identity(&empty), Homomorphism::new())
        }
        SmoOp::Change { target, add, remove, instances } => {
            if !instances.is_empty() {
                return Err(invalid("instance nodes are only meaningful in the data-to-schema direction"));
            }
            let t = resolve(index, target)?;
            compile_change(target, t, add, remove, g, mode)?
        }
        SmoOp::Split { target, into, drop, restrict, loops } => {
            compile_split(target, into, drop, restrict, loops.as_deref(), g, index)?
        }
        SmoOp::Union { targets, into } => {
            if targets.len() < 2 {
                return Err(invalid("union needs at least two types"));
            }
            let mut p = PropertyGraph::new(true);
            let mut m = Homomorphism::new();
            for label in targets {
                let t = resolve(index, label)?;
                p.add_node(label.as_str(), ElementData::default()).map_err(|_| invalid(format!("`{label}` listed twice")))?;
                m.insert(ObjectId::new(label.as_str()), t.clone());
            }
            for a in targets {
                for b in targets {
                    let (ta, tb) = (&index.nodes[a], &index.nodes[b]);
                    if g.has_edge_between(ta, tb) {
                        p.add_fresh_edge(&a.as_str().into(), &b.as_str().into(), ElementData::default())?;
                    }
                }
            }
            let mut r = single(into, ElementData::default());
            if p.edge_count() > 0 {
                r.add_edge("loop", &into.as_str().into(), &into.as_str().into(), ElementData::default())?;
            }
            let r_map = Homomorphism { node_map: targets.iter().map(|l| (l.as_str().into(), into.as_str().into())).collect() };
            let rule = Rule::new(p.clone(), p.clone(), r, Homomorphism::identity(&p), r_map)?;
            let mut c = Compiled::plain(rule, m);
            c.removed_labels = targets.clone();
            c.new_labels.insert(into.clone(), into.as_str().into());
            c
        }
    };
    compiled.relation = smo.relation.clone();
    Ok(compiled)
}

fn compile_create(
    label: &str,
    properties: &[PropertySpec],
    edges: &[EdgeSpec],
    index: &TypeIndex,
    mode: ValueMode,
) -> Result<Compiled, SmoError> {
    if index.node(label).is_some() {
        return Err(invalid(format!("type `{label}` already exists")));
    }
    let mut p = PropertyGraph::new(true);
    let mut m = Homomorphism::new();
    for e in edges {
        for end in [&e.source, &e.target] {
            if end != label && !p.contains_node(&end.as_str().into()) {
                let t = resolve(index, end)?;
                p.add_node(end.as_str(), ElementData::default())?;
                m.insert(end.as_str().into(), t.clone());
            }
        }
    }
    let mut r = p.clone();
    let mut props = PropertyDictionary::new();
    let mut mandatory = BTreeSet::new();
    for spec in properties {
        props.set(spec.key.clone(), spec.schema_values(mode));
        if spec.mandatory {
            mandatory.insert(spec.key.clone());
        }
    }
    r.add_node(label, ElementData { props, mandatory })?;
    let mut edge_labels = BTreeMap::new();
    for e in edges {
        let id = crate::ddl::schema_edge_id(&e.source, &e.label, &e.target);
        r.add_edge(id.clone(), &e.source.as_str().into(), &e.target.as_str().into(), ElementData::default())
            .map_err(|err| invalid(err.to_string()))?;
        edge_labels.insert(id, e.label.clone());
    }
    let rule = Rule::new(p.clone(), p.clone(), r, Homomorphism::identity(&p), Homomorphism::identity(&p))?;
    let mut c = Compiled::plain(rule, m);
    c.new_labels.insert(label.to_owned(), label.into());
    c.edge_labels = edge_labels;
    Ok(c)
}

fn compile_change(
    label: &str,
    target: &ObjectId,
    add: &[PropertySpec],
    remove: &[String],
    s: &PropertyGraph,
    mode: ValueMode,
) -> Result<Compiled, SmoError> {
    let data = s.node(target).ok_or_else(|| SmoError::UnknownTarget(label.to_owned()))?;
    let mut l = ElementData::default();
    for k in remove {
        if !data.props.contains_key(k) {
            return Err(invalid(format!("`{label}` has no property `{k}`")));
        }
        l.props.set(k.clone(), BTreeSet::new());
    }
    let mut r = ElementData::default();
    for spec in add {
        if remove.contains(&spec.key) {
            return Err(invalid(format!("`{}` is both added and removed", spec.key)));
        }
        r.props.set(spec.key.clone(), spec.schema_values(mode));
        if spec.mandatory {
            r.mandatory.insert(spec.key.clone());
        }
    }
    let p = single(label, ElementData::default());
    let id = Homomorphism::identity(&p);
    let rule = Rule::new(single(label, l), p, single(label, r), id.clone(), id)?;
    Ok(Compiled::plain(rule, Homomorphism::from_pairs([(label, target)])))
}

#[allow(clippy::too_many_arguments)]
fn compile_split(
    label: &str,
    into: &[String],
    drop: &BTreeMap<String, Vec<String>>,
    restrict: &BTreeMap<String, BTreeMap<String, BTreeSet<Value>>>,
    loops: Option<&[(String, String)]>,
    s: &PropertyGraph,
    index: &TypeIndex,
) -> Result<Compiled, SmoError> {
    let t = resolve(index, label)?;
    let host = s.node(t).ok_or_else(|| SmoError::UnknownTarget(label.to_owned()))?;
    let parts: BTreeSet<&String> = into.iter().collect();
    if parts.len() < 2 || parts.len() != into.len() {
        return Err(invalid("split needs at least two distinct parts"));
    }
    for part in drop.keys().chain(restrict.keys()) {
        if !parts.contains(part) {
            return Err(invalid(format!("`{part}` is not one of the parts")));
        }
    }
    for part in into {
        if index.node(part).is_some() && part != label {
            return Err(invalid(format!("type `{part}` already exists")));
        }
    }

    let mut l_data = ElementData::default();
    for keys in drop.values() {
        for k in keys {
            if !host.props.contains_key(k) {
                return Err(invalid(format!("`{label}` has no property `{k}`")));
            }
            l_data.props.set(k.clone(), BTreeSet::new());
        }
    }
    for narrowed in restrict.values() {
        for (k, vals) in narrowed {
            let domain = host.props.values(k).ok_or_else(|| invalid(format!("`{label}` has no property `{k}`")))?;
            if !vals.is_subset(domain) {
                return Err(invalid(format!("restricted values of `{k}` are not a subset of the type's values")));
            }
            l_data.props.extend_values(k.clone(), vals.iter().cloned());
        }
    }
    let mut lhs = single(label, l_data.clone());
    let has_loop = s.has_edge_between(t, t);
    if has_loop {
        lhs.add_edge("loop", &label.into(), &label.into(), ElementData::default())?;
    }

    let mut p = PropertyGraph::new(true);
    for part in into {
        let mut d = l_data.clone();
        for k in drop.get(part).into_iter().flatten() {
            d.props.remove_key(k);
        }
        for (k, vals) in restrict.get(part).into_iter().flatten() {
            d.props.set(k.clone(), vals.clone());
        }
        p.add_node(part.as_str(), d)?;
    }
    if has_loop {
        let kept: Vec<(String, String)> = match loops {
            Some(ls) => ls.to_vec(),
            None => into.iter().flat_map(|a| into.iter().map(move |b| (a.clone(), b.clone()))).collect(),
        };
        for (a, b) in kept {
            if !parts.contains(&a) || !parts.contains(&b) {
                return Err(invalid(format!("loop ({a}, {b}) does not join two parts")));
            }
            p.add_fresh_edge(&a.as_str().into(), &b.as_str().into(), ElementData::default())
                .map_err(|e| invalid(e.to_string()))?;
        }
    } else if loops.is_some_and(|l| !l.is_empty()) {
        return Err(invalid(format!("`{label}` has no self-loop to distribute")));
    }
    let l_map = Homomorphism { node_map: into.iter().map(|x| (x.as_str().into(), label.into())).collect() };
    let rule = Rule::new(lhs, p.clone(), p.clone(), l_map, Homomorphism::identity(&p))?;
    let mut c = Compiled::plain(rule, Homomorphism::from_pairs([(label, t)]));
    c.removed_labels.push(label.to_owned());
    for part in into {
        c.new_labels.insert(part.clone(), part.as_str().into());
    }
    Ok(c)
}

fn compile_instance_change(smo: &SchemaManipulation, g: &PropertyGraph, mode: ValueMode) -> Result<Compiled, SmoError> {
    let SmoOp::Change { add, remove, instances, .. } = &smo.op else {
        return Err(invalid("only `change` with instance nodes can run in the data-to-schema direction"));
    };
    if !remove.is_empty() {
        return Err(invalid("instance-side deletions need no schema change; rewrite the instance directly"));
    }
    if instances.is_empty() || add.is_empty() {
        return Err(invalid("data-to-schema change needs instance nodes and properties to add"));
    }
    let mut p = PropertyGraph::new(g.is_simple());
    let mut r = PropertyGraph::new(g.is_simple());
    let mut m = Homomorphism::new();
    for (i, n) in instances.iter().enumerate() {
        if !g.contains_node(n) {
            return Err(SmoError::UnknownTarget(n.to_string()));
        }
        let x = ObjectId::new(format!("x{i}"));
        p.add_node(x.clone(), ElementData::default())?;
        let mut d = ElementData::default();
        for spec in add {
            if spec.values.is_empty() && mode == ValueMode::Extensional {
                return Err(invalid(format!("instance property `{}` needs values", spec.key)));
            }
            d.props.set(spec.key.clone(), spec.values.iter().cloned().collect());
        }
        r.add_node(x.clone(), d)?;
        m.insert(x, n.clone());
    }
    let id = Homomorphism::identity(&p);
    let rule = Rule::new(p.clone(), p, r, id.clone(), id)?;
    let mut c = Compiled::plain(rule, m);
    c.relation = smo.relation.clone();
    Ok(c)
}

/// One schema rewrite of an audit trail, with the labels in force after it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrailEntry {
    pub kind: String,
    pub rule: Rule,
    pub matching: Matching,
    #[serde(default)]
    pub direction: Direction,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub relation: Option<PropagationRelation>,
    pub index: TypeIndex,
}

impl TrailEntry {
    pub fn new(kind: impl Into<String>, rule: Rule, matching: Matching, index: TypeIndex) -> Self {
        TrailEntry { kind: kind.into(), rule, matching, direction: Direction::SchemaToData, relation: None, index }
    }

    /// The rule removing `keys` from one schema node.
    pub fn property_deletion(node: &ObjectId, keys: &[&str], index: TypeIndex) -> Self {
        let mut l = ElementData::default();
        for k in keys {
            l.props.set(*k, BTreeSet::new());
        }
        let p = single("x", ElementData::default());
        let id = Homomorphism::identity(&p);
        let rule = Rule::new(single("x", l), p.clone(), p, id.clone(), id).expect("well-formed deletion");
        TrailEntry::new("change", rule, Homomorphism::from_pairs([("x", node)]), index)
    }

    /// The rule adding properties to one schema node.
    pub fn property_addition(node: &ObjectId, props: PropertyDictionary, index: TypeIndex) -> Self {
        let p = single("x", ElementData::default());
        let id = Homomorphism::identity(&p);
        let rule = Rule::new(p.clone(), p, single("x", ElementData::new(props)), id.clone(), id)
            .expect("well-formed addition");
        TrailEntry::new("change", rule, Homomorphism::from_pairs([("x", node)]), index)
    }

    fn removed_keys(&self) -> Option<Vec<String>> {
        let plan = derive_actions(&self.rule);
        let only_keys = plan.node_deletes.is_empty()
            && plan.clones.is_empty()
            && plan.edge_deletes.is_empty()
            && plan.merges.is_empty()
            && plan.node_adds.is_empty()
            && plan.edge_adds.is_empty()
            && plan.property_adds.is_empty()
            && self.rule.lhs.node_count() == 1
            && plan.property_deletes.iter().all(|e| e.action == EditAction::RemoveKey);
        only_keys.then(|| plan.property_deletes.iter().map(|e| e.key.clone()).collect())
    }
}

/// The schema's rewrites since its DDL origin.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditTrail {
    pub origin: PropertyGraph,
    pub origin_index: TypeIndex,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub origin_type: Option<GraphType>,
    pub entries: Vec<TrailEntry>,
    #[serde(skip)]
    head: Option<PropertyGraph>,
}

impl AuditTrail {
    pub fn new(origin: PropertyGraph, origin_index: TypeIndex, origin_type: Option<GraphType>) -> Self {
        AuditTrail { head: Some(origin.clone()), origin, origin_index, origin_type, entries: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// The schema after every entry.
    pub fn head(&self) -> Result<PropertyGraph, SmoError> {
        match &self.head {
            Some(h) => Ok(h.clone()),
            None => Ok(self.versions()?.pop().expect("origin")),
        }
    }

    /// Labels after every entry.
    pub fn head_index(&self) -> &TypeIndex {
        self.index_at(self.entries.len())
    }

    /// Labels of version `v`, where version 0 is the origin.
    pub fn index_at(&self, v: usize) -> &TypeIndex {
        if v == 0 {
            &self.origin_index
        } else {
            &self.entries[v - 1].index
        }
    }

    /// Every application, in order.
    pub fn applications(&self) -> Result<Vec<RuleApplication>, SmoError> {
        let mut current = self.origin.clone();
        let mut out = Vec::new();
        for (i, e) in self.entries.iter().enumerate() {
            let app = apply_rule(&current, &e.rule, &e.matching)
                .map_err(|err| SmoError::ReplayMismatch { index: i, reason: err.to_string() })?;
            current = app.graph().clone();
            out.push(app);
        }
        Ok(out)
    }

    /// Schema versions `0..=len`.
    pub fn versions(&self) -> Result<Vec<PropertyGraph>, SmoError> {
        let mut out = vec![self.origin.clone()];
        for app in self.applications()? {
            out.push(app.expanded.graph);
        }
        Ok(out)
    }

    /// Replays the trail from the origin.
    pub fn replay(&self) -> Result<PropertyGraph, SmoError> {
        Ok(self.versions()?.pop().expect("origin"))
    }

    /// Appends an entry applied to the head; returns the new head.
    pub fn record(&mut self, entry: TrailEntry) -> Result<PropertyGraph, SmoError> {
        let head = self.head()?;
        let app = apply_rule(&head, &entry.rule, &entry.matching)
            .map_err(|err| SmoError::ReplayMismatch { index: self.entries.len(), reason: err.to_string() })?;
        self.entries.push(entry);
        self.head = Some(app.expanded.graph.clone());
        Ok(app.expanded.graph)
    }

    fn insert(&self, at: usize, entry: TrailEntry) -> Result<AuditTrail, SmoError> {
        let mut out = self.clone();
        out.entries.insert(at, entry);
        out.head = Some(out.replay()?);
        Ok(out)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("trail serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, SmoError> {
        let mut t: AuditTrail = serde_json::from_str(text).map_err(|e| SmoError::Json(e.to_string()))?;
        t.head = Some(t.replay()?);
        Ok(t)
    }
}

/// Whether entry `j` of the trail clones a node into a set containing `node`.
fn clone_origin(app: &RuleApplication, entry: &TrailEntry, node: &ObjectId) -> Option<ObjectId> {
    let plan = derive_actions(&entry.rule);
    for (x, _) in &plan.clones {
        let fibre = entry.rule.l_map.preimage(x);
        let produced = fibre
            .iter()
            .filter_map(|p| app.restricted.matching.get(p))
            .filter_map(|n| app.expanded.fwd_map.get(n))
            .any(|n| n == node);
        if produced {
            return entry.matching.get(x).cloned();
        }
    }
    None
}

/// Inserts a property addition that refers to version `at` of the schema and
/// replays the rest of the trail, so that later clones of the target inherit
/// the addition. An addition at the head is simply recorded.
pub fn push_through_addition(trail: &AuditTrail, entry: TrailEntry, at: usize) -> Result<AuditTrail, SmoError> {
    if at > trail.len() {
        return Err(invalid(format!("trail has no version {at}")));
    }
    if at == trail.len() {
        let mut out = trail.clone();
        out.record(entry)?;
        return Ok(out);
    }
    let mut entry = entry;
    entry.index = trail.index_at(at).clone();
    trail.insert(at, entry)
}

/// Relocates a property deletion from version `at` to before every clone
/// that passed the property on, so no part keeps an inherited property.
///
/// A deletion at the head of a property the node did not inherit is an
/// [`SmoError::AmbiguousOrigin`]; the caller applies it locally instead.
pub fn push_back_deletion(trail: &AuditTrail, entry: TrailEntry, at: usize) -> Result<AuditTrail, SmoError> {
    if at > trail.len() {
        return Err(invalid(format!("trail has no version {at}")));
    }
    let keys = entry.removed_keys().ok_or_else(|| invalid("not a property deletion on a single node"))?;
    let x = entry.rule.lhs.node_ids().next().expect("one node").clone();
    let mut node = entry.matching.get(&x).expect("total matching").clone();
    let apps = trail.applications()?;
    let versions = trail.versions()?;
    let mut pos = at;
    'outer: loop {
        for j in (0..pos).rev() {
            if let Some(parent) = clone_origin(&apps[j], &trail.entries[j], &node) {
                let inherited = versions[j]
                    .node(&parent)
                    .is_some_and(|d| keys.iter().all(|k| d.props.contains_key(k)));
                if !inherited {
                    break 'outer;
                }
                node = parent;
                pos = j;
                continue 'outer;
            }
        }
        break;
    }
    if pos == trail.len() {
        let label = trail.head_index().label_of(&node).unwrap_or(node.as_str()).to_owned();
        return Err(SmoError::AmbiguousOrigin { label, key: keys.join(", ") });
    }
    let mut moved = entry;
    moved.matching = Homomorphism::from_pairs([(x, node)]);
    moved.index = trail.index_at(pos).clone();
    trail.insert(pos, moved)
}

/// Carries labels across a schema rewrite given by an application.
fn carry_labels(old: &TypeIndex, app: &RuleApplication, new_schema: &PropertyGraph) -> TypeIndex {
    let back = &app.restricted.back_map;
    let fwd = &app.expanded.fwd_map;
    let mut out = TypeIndex::default();
    let mut labelled: BTreeSet<ObjectId> = BTreeSet::new();
    for (label, t) in &old.nodes {
        let pre = back.preimage(t);
        let Some(keep) = pre.iter().find(|n| *n == t).or(pre.first()) else {
            continue;
        };
        let image = fwd.get(keep).expect("total").clone();
        if labelled.insert(image.clone()) {
            out.nodes.insert(label.clone(), image);
        }
    }
    for e in new_schema.edge_ids() {
        let mut base = e.as_str();
        let label = loop {
            if let Some(l) = old.edge_label(&ObjectId::new(base)) {
                break Some(l.to_owned());
            }
            match base.rfind("_clone") {
                Some(i) if base[i + 6..].chars().all(|c| c.is_ascii_digit()) && i + 6 < base.len() => {
                    base = &base[..i]
                }
                _ => break None,
            }
        };
        if let Some(l) = label {
            out.edges.insert(e.clone(), l);
        }
    }
    out
}

/// Label for schema edges created without one.
pub const UNLABELLED_EDGE: &str = "EDGE";

fn finish_index(mut index: TypeIndex, schema: &PropertyGraph) -> TypeIndex {
    let labelled: BTreeSet<ObjectId> = index.nodes.values().cloned().collect();
    for n in schema.node_ids() {
        if !labelled.contains(n) {
            index.nodes.insert(n.to_string(), n.clone());
        }
    }
    for e in schema.edge_ids() {
        index.edges.entry(e.clone()).or_insert_with(|| UNLABELLED_EDGE.to_owned());
    }
    index.nodes.retain(|_, n| schema.contains_node(n));
    index.edges.retain(|e, _| schema.contains_edge(e));
    index
}

/// An expansive rule turning `s` into `s_plus` along `map`, touching only the
/// nodes that change. Empty when nothing changes.
fn diff_rule(s: &PropertyGraph, s_plus: &PropertyGraph, map: &Homomorphism) -> Option<(Rule, Matching)> {
    let image: BTreeSet<&ObjectId> = map.node_map.values().collect();
    let mut p_nodes: BTreeSet<ObjectId> = BTreeSet::new();
    for (t, d) in s.nodes() {
        let u = &map.node_map[t];
        if s_plus.node(u) != Some(d) || map.preimage(u).len() > 1 {
            p_nodes.insert(t.clone());
        }
    }
    let fresh: BTreeSet<ObjectId> = s_plus.node_ids().filter(|n| !image.contains(n)).cloned().collect();
    for (e, edge) in s_plus.edges() {
        let sources = map.preimage(&edge.source);
        let targets = map.preimage(&edge.target);
        let before: Vec<&ElementData> = sources
            .iter()
            .flat_map(|a| targets.iter().filter_map(move |b| s.edge_between(a, b)))
            .map(|f| &s.edge(f).expect("edge").data)
            .collect();
        let unchanged = before.len() == 1 && before[0] == &s_plus.edge(e).expect("edge").data;
        if !unchanged {
            p_nodes.extend(sources);
            p_nodes.extend(targets);
        }
    }
    if p_nodes.is_empty() && fresh.is_empty() {
        return None;
    }
    let mut p = PropertyGraph::new(s.is_simple());
    for n in &p_nodes {
        p.add_node(n.clone(), s.node(n).expect("node").clone()).expect("fresh");
    }
    for (e, edge) in s.edges() {
        if p_nodes.contains(&edge.source) && p_nodes.contains(&edge.target) {
            p.add_edge(e.clone(), &edge.source, &edge.target, edge.data.clone()).expect("fresh");
        }
    }
    let r_nodes: BTreeSet<ObjectId> = p_nodes.iter().map(|n| map.node_map[n].clone()).chain(fresh).collect();
    let mut r = PropertyGraph::new(s.is_simple());
    for n in &r_nodes {
        r.add_node(n.clone(), s_plus.node(n).expect("node").clone()).expect("fresh");
    }
    for (e, edge) in s_plus.edges() {
        if r_nodes.contains(&edge.source) && r_nodes.contains(&edge.target) {
            r.add_edge(e.clone(), &edge.source, &edge.target, edge.data.clone()).expect("fresh");
        }
    }
    let r_map = Homomorphism { node_map: p_nodes.iter().map(|n| (n.clone(), map.node_map[n].clone())).collect() };
    let id = Homomorphism::identity(&p);
    let rule = Rule::new(p.clone(), p, r, id.clone(), r_map).ok()?;
    Some((rule, id))
}

/// An instance, its schema, the typing between them and the schema's trail.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Hierarchy {
    pub instance: PropertyGraph,
    pub schema: PropertyGraph,
    pub hom: Homomorphism,
    pub index: TypeIndex,
    pub mode: ValueMode,
    pub trail: AuditTrail,
}

impl Hierarchy {
    /// Fails unless `hom` types `instance` by `schema`.
    pub fn new(
        instance: PropertyGraph,
        schema: PropertyGraph,
        hom: Homomorphism,
        index: TypeIndex,
        mode: ValueMode,
        origin_type: Option<GraphType>,
    ) -> Result<Self, SmoError> {
        let trail = AuditTrail::new(schema.clone(), index.clone(), origin_type);
        Self::with_trail(instance, hom, mode, trail)
    }

    /// The schema and labels are taken from the head of `trail`.
    pub fn with_trail(
        instance: PropertyGraph,
        hom: Homomorphism,
        mode: ValueMode,
        trail: AuditTrail,
    ) -> Result<Self, SmoError> {
        let schema = trail.head()?;
        let index = trail.head_index().clone();
        let h = Hierarchy { instance, schema, hom, index, mode, trail };
        let report = h.validate()?;
        if let Some(v) = report.violations.first() {
            return Err(PropagationError::InconsistentInputs(format!("typing is invalid: {v}")).into());
        }
        Ok(h)
    }

    pub fn validate(&self) -> Result<ValidationReport, SmoError> {
        Ok(check_homomorphism(&self.instance, &self.schema, &self.hom, self.mode)?)
    }

    /// Applies a manipulation; on error nothing changes.
    pub fn apply(&mut self, smo: &SchemaManipulation) -> Result<(), SmoError> {
        let next = self.applied(smo)?;
        *self = next;
        Ok(())
    }

    fn applied(&self, smo: &SchemaManipulation) -> Result<Hierarchy, SmoError> {
        if smo.direction == Direction::DataToSchema {
            if let SmoOp::Change { target, instances, .. } = &smo.op {
                let t = resolve(&self.index, target)?;
                for n in instances {
                    if self.hom.get(n) != Some(t) {
                        return Err(invalid(format!("`{n}` is not an instance of `{target}`")));
                    }
                }
            }
            let c = compile_smo(smo, &self.instance, &self.index, self.mode)?;
            return self.instance_rewritten(&c.rule, &c.matching, c.relation.as_ref());
        }
        match &smo.op {
            SmoOp::Rename { target, to } => self.renamed(target, to),
            SmoOp::Change { target, add, remove, instances } if instances.is_empty() => {
                if self.index.node(target).is_none() {
                    return self.changed_abstract(target, add, remove);
                }
                if !remove.is_empty() && add.is_empty() {
                    let t = &self.index.nodes[target];
                    let keys: Vec<&str> = remove.iter().map(String::as_str).collect();
                    let entry = TrailEntry::property_deletion(t, &keys, self.index.clone());
                    match push_back_deletion(&self.trail, entry, self.trail.len()) {
                        Ok(trail) => return self.retrailed(trail),
                        Err(SmoError::AmbiguousOrigin { .. }) => {}
                        Err(e) => return Err(e),
                    }
                }
                let c = compile_smo(smo, &self.schema, &self.index, self.mode)?;
                self.schema_rewritten(&c, "change")
            }
            op => {
                let c = compile_smo(smo, &self.schema, &self.index, self.mode)?;
                let kind = match op {
                    SmoOp::Create { .. } => "create",
                    SmoOp::Drop { .. } => "drop",
                    SmoOp::Split { .. } => "split",
                    SmoOp::Union { .. } => "union",
                    _ => "change",
                };
                self.schema_rewritten(&c, kind)
            }
        }
    }

    /// Rewrites the schema with an arbitrary rule and propagates to the data.
    pub fn rewrite_schema(
        &mut self,
        rule: &Rule,
        matching: &Matching,
        relation: Option<&PropagationRelation>,
    ) -> Result<(), SmoError> {
        let mut c = Compiled::plain(rule.clone(), matching.clone());
        c.relation = relation.cloned();
        *self = self.schema_rewritten(&c, "rule")?;
        Ok(())
    }

    /// Rewrites the instance with an arbitrary rule and propagates to the
    /// schema.
    pub fn rewrite_instance(
        &mut self,
        rule: &Rule,
        matching: &Matching,
        relation: Option<&PropagationRelation>,
    ) -> Result<(), SmoError> {
        *self = self.instance_rewritten(rule, matching, relation)?;
        Ok(())
    }

    fn schema_rewritten(&self, c: &Compiled, kind: &str) -> Result<Hierarchy, SmoError> {
        let app = apply_rule(&self.schema, &c.rule, &c.matching)?;
        let s_minus = &app.restricted.graph;
        let back = &app.restricted.back_map;

        let mut relation = c.relation.clone().unwrap_or_default();
        relation.keep = relation
            .keep
            .into_iter()
            .map(|(n, t)| {
                let resolved = app.restricted.matching.get(&t).cloned().unwrap_or(t);
                (n, resolved)
            })
            .collect();
        let untouched = back.is_identity() && s_minus == &self.schema;
        let (instance, h_minus) = if untouched && relation.keep.is_empty() {
            (self.instance.clone(), self.hom.clone())
        } else {
            let p = controlled_propagate_to_instance(&self.instance, &self.hom, s_minus, back, self.mode, &relation)?;
            (p.graph, p.hom)
        };
        let hom = compose(&h_minus, &app.expanded.fwd_map)?;
        let schema = app.graph().clone();
        let report = check_homomorphism(&instance, &schema, &hom, self.mode)?;
        if let Some(v) = report.violations.first() {
            return Err(PropagationError::Unrepairable(v.to_string()).into());
        }

        let mut index = carry_labels(&self.index, &app, &schema);
        for label in &c.removed_labels {
            index.nodes.remove(label);
        }
        let m_plus = &app.expanded.matching;
        for (label, r) in &c.new_labels {
            index.nodes.insert(label.clone(), m_plus.node_map[r].clone());
        }
        for (re, label) in &c.edge_labels {
            let edge = c.rule.rhs.edge(re).expect("rule edge");
            if let Some(e) = schema.edge_between(&m_plus.node_map[&edge.source], &m_plus.node_map[&edge.target]) {
                index.edges.insert(e.clone(), label.clone());
            }
        }
        let index = finish_index(index, &schema);

        let mut trail = self.trail.clone();
        let mut entry = TrailEntry::new(kind, c.rule.clone(), c.matching.clone(), index.clone());
        entry.relation = c.relation.clone();
        let replayed = trail.record(entry)?;
        if replayed != schema {
            return Err(SmoError::ReplayMismatch { index: trail.len() - 1, reason: "head differs".into() });
        }
        Ok(Hierarchy { instance, schema, hom, index, mode: self.mode, trail })
    }

    fn instance_rewritten(
        &self,
        rule: &Rule,
        matching: &Matching,
        relation: Option<&PropagationRelation>,
    ) -> Result<Hierarchy, SmoError> {
        let app = apply_rule(&self.instance, rule, matching)?;
        let h_minus = compose(&app.restricted.back_map, &self.hom)?;
        let g_plus = app.graph().clone();
        let default = PropagationRelation::default();
        let mut relation = relation.cloned().unwrap_or(default);
        relation.merge_into = relation
            .merge_into
            .into_iter()
            .map(|(n, t)| (app.expanded.matching.get(&n).cloned().unwrap_or(n), t))
            .collect();
        let p = controlled_propagate_to_schema(
            &self.schema,
            &g_plus,
            &h_minus,
            &app.expanded.fwd_map,
            self.mode,
            &relation,
        )?;
        let schema_map = p.schema_map.clone().expect("schema-side propagation");
        let Some((diff, id)) = diff_rule(&self.schema, &p.graph, &schema_map) else {
            return Ok(Hierarchy { instance: g_plus, hom: p.hom, ..self.clone() });
        };
        let schema_app = apply_rule(&self.schema, &diff, &id)?;
        let schema = schema_app.graph().clone();
        // ids of fresh schema nodes come from the recorded rule
        let m_plus = &schema_app.expanded.matching;
        let hom = Homomorphism {
            node_map: p
                .hom
                .iter()
                .map(|(n, t)| (n.clone(), m_plus.get(t).cloned().unwrap_or_else(|| t.clone())))
                .collect(),
        };
        let report = check_homomorphism(&g_plus, &schema, &hom, self.mode)?;
        if let Some(v) = report.violations.first() {
            return Err(PropagationError::Unrepairable(v.to_string()).into());
        }
        let index = finish_index(carry_labels(&self.index, &schema_app, &schema), &schema);
        let mut trail = self.trail.clone();
        let mut entry = TrailEntry::new("describe", diff, id, index.clone());
        entry.direction = Direction::DataToSchema;
        entry.relation = Some(relation).filter(|r| !r.is_empty());
        trail.record(entry)?;
        Ok(Hierarchy { instance: g_plus, schema, hom, index, mode: self.mode, trail })
    }

    fn renamed(&self, target: &str, to: &str) -> Result<Hierarchy, SmoError> {
        let mut index = self.index.clone();
        if index.node(to).is_some() {
            return Err(invalid(format!("type `{to}` already exists")));
        }
        if let Some(id) = index.nodes.remove(target) {
            index.nodes.insert(to.to_owned(), id);
        } else if index.edges.values().any(|l| l == target) {
            for l in index.edges.values_mut() {
                if l == target {
                    *l = to.to_owned();
                }
            }
        } else {
            return Err(SmoError::UnknownTarget(target.to_owned()));
        }
        let empty = PropertyGraph::new(true);
        let mut trail = self.trail.clone();
        trail.record(TrailEntry::new("rename", Rule::identity(&empty), Homomorphism::new(), index.clone()))?;
        Ok(Hierarchy { index, trail, ..self.clone() })
    }

    /// Changes a type that was split earlier: the change is made where the
    /// type last existed and carried through the rest of the trail.
    fn changed_abstract(&self, label: &str, add: &[PropertySpec], remove: &[String]) -> Result<Hierarchy, SmoError> {
        let v = (0..=self.trail.len())
            .rev()
            .find(|v| self.trail.index_at(*v).node(label).is_some())
            .ok_or_else(|| SmoError::UnknownTarget(label.to_owned()))?;
        let versions = self.trail.versions()?;
        let idx = self.trail.index_at(v).clone();
        let node = idx.nodes[label].clone();
        let mut trail = self.trail.clone();
        if !remove.is_empty() {
            let keys: Vec<&str> = remove.iter().map(String::as_str).collect();
            if !versions[v].node(&node).is_some_and(|d| keys.iter().all(|k| d.props.contains_key(k))) {
                return Err(invalid(format!("`{label}` has no such properties")));
            }
            trail = push_back_deletion(&trail, TrailEntry::property_deletion(&node, &keys, idx.clone()), v)?;
        }
        if !add.is_empty() {
            let props: PropertyDictionary =
                add.iter().map(|s| (s.key.clone(), s.schema_values(self.mode))).collect();
            if add.iter().any(|s| s.mandatory) {
                return Err(invalid("properties pushed through a split cannot be mandatory"));
            }
            trail = push_through_addition(&trail, TrailEntry::property_addition(&node, props, idx), v)?;
        }
        self.retrailed(trail)
    }

    /// Adopts a rearranged trail whose head has the same nodes as the current
    /// schema, repairing the instance where needed.
    fn retrailed(&self, trail: AuditTrail) -> Result<Hierarchy, SmoError> {
        let schema = trail.head()?;
        let same_nodes = schema.node_ids().eq(self.schema.node_ids());
        if !same_nodes {
            return Err(SmoError::ReplayMismatch { index: trail.len(), reason: "rearranged trail changes the schema's nodes".into() });
        }
        let back = Homomorphism::identity(&schema);
        let p = controlled_propagate_to_instance(
            &self.instance,
            &self.hom,
            &schema,
            &back,
            self.mode,
            &PropagationRelation::default(),
        )?;
        let index = finish_index(self.index.clone(), &schema);
        Ok(Hierarchy { instance: p.graph, schema, hom: p.hom, index, mode: self.mode, trail })
    }

    /// The DDL graph type of the current schema, with inheritance read off the
    /// trail.
    pub fn graph_type(&self) -> Result<GraphType, SmoError> {
        Ok(crate::ddl::schema_to_graph_type(&self.schema, &self.index, Some(&self.trail))?)
    }
}
