//! Restoring the typing `G -> S` after a restrictive schema rewrite or an
//! expansive instance rewrite.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::PropagationError;
use crate::graph::{ElementData, ObjectId, PropertyGraph};
use crate::hom::{check_homomorphism, value_conforms, Homomorphism, ValueMode};
use crate::value::{DataType, Value};

/// Pairs `(instance-side node, schema-side node)`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TypingRelation {
    pub pairs: BTreeSet<(ObjectId, ObjectId)>,
}

impl TypingRelation {
    /// `type(n)`, sorted.
    pub fn types_of(&self, n: &ObjectId) -> Vec<ObjectId> {
        self.pairs.iter().filter(|(a, _)| a == n).map(|(_, t)| t.clone()).collect()
    }

    /// `h^r = {(n, t) : h(n) = back(t)}` for a schema rewritten to `s_minus`.
    pub fn restrictive(
        g: &PropertyGraph,
        h: &Homomorphism,
        s_minus: &PropertyGraph,
        back_map: &Homomorphism,
    ) -> Result<Self, PropagationError> {
        let mut by_origin: BTreeMap<&ObjectId, Vec<&ObjectId>> = BTreeMap::new();
        for t in s_minus.node_ids() {
            let origin = back_map
                .get(t)
                .ok_or_else(|| inconsistent(format!("schema node `{t}` has no origin")))?;
            by_origin.entry(origin).or_default().push(t);
        }
        let mut pairs = BTreeSet::new();
        for n in g.node_ids() {
            let image = h.get(n).ok_or_else(|| inconsistent(format!("instance node `{n}` is untyped")))?;
            for t in by_origin.get(image).into_iter().flatten() {
                pairs.insert((n.clone(), (*t).clone()));
            }
        }
        Ok(TypingRelation { pairs })
    }

    /// `h^e = {(fwd(n), h(n))}` for an instance rewritten to `g_plus`.
    pub fn expansive(
        g_plus: &PropertyGraph,
        h: &Homomorphism,
        fwd_map: &Homomorphism,
    ) -> Result<Self, PropagationError> {
        let mut pairs = BTreeSet::new();
        for (n, t) in h.iter() {
            let image = fwd_map
                .get(n)
                .ok_or_else(|| inconsistent(format!("instance node `{n}` has no image after rewriting")))?;
            if !g_plus.contains_node(image) {
                return Err(inconsistent(format!("`{image}` is not a node of the rewritten instance")));
            }
            pairs.insert((image.clone(), t.clone()));
        }
        Ok(TypingRelation { pairs })
    }
}

/// User directives for controlled propagation.
///
/// `keep` names, per instance node, the single schema clone that survives;
/// `merge_into` sends an added instance node to an existing schema node.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PropagationRelation {
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub keep: BTreeMap<ObjectId, ObjectId>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub merge_into: BTreeMap<ObjectId, ObjectId>,
}

impl PropagationRelation {
    pub fn is_empty(&self) -> bool {
        self.keep.is_empty() && self.merge_into.is_empty()
    }

    pub fn from_json(text: &str) -> Result<Self, PropagationError> {
        serde_json::from_str(text).map_err(|e| PropagationError::Json(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("relation serializes")
    }
}

/// A repaired graph together with its new typing.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Propagated {
    pub graph: PropertyGraph,
    pub hom: Homomorphism,
    /// Where each old schema node went; only set when propagating to the
    /// schema.
    pub schema_map: Option<Homomorphism>,
}

fn inconsistent(msg: String) -> PropagationError {
    PropagationError::InconsistentInputs(msg)
}

/// Canonical repair of the instance after the schema was restricted to
/// `s_minus`: untyped nodes go, multiply typed nodes are cloned.
pub fn propagate_to_instance(
    g: &PropertyGraph,
    h: &Homomorphism,
    s_minus: &PropertyGraph,
    back_map: &Homomorphism,
    mode: ValueMode,
) -> Result<Propagated, PropagationError> {
    controlled_propagate_to_instance(g, h, s_minus, back_map, mode, &PropagationRelation::default())
}

/// As [`propagate_to_instance`], keeping only the designated clone of every
/// node named in `rel.keep`.
pub fn controlled_propagate_to_instance(
    g: &PropertyGraph,
    h: &Homomorphism,
    s_minus: &PropertyGraph,
    back_map: &Homomorphism,
    mode: ValueMode,
    rel: &PropagationRelation,
) -> Result<Propagated, PropagationError> {
    let typing = TypingRelation::restrictive(g, h, s_minus, back_map)?;
    for (n, t) in &rel.keep {
        if !g.contains_node(n) {
            return Err(bad(n, t, "no such instance node"));
        }
        if !typing.pairs.contains(&(n.clone(), t.clone())) {
            return Err(bad(n, t, "not a clone of the node's type"));
        }
    }

    let mut out = g.clone();
    let mut hom = Homomorphism::new();
    for n in g.node_ids() {
        let types = match rel.keep.get(n) {
            Some(t) => vec![t.clone()],
            None => typing.types_of(n),
        };
        let Some((t0, rest)) = types.split_first() else {
            out.remove_node(n)?;
            continue;
        };
        hom.insert(n.clone(), t0.clone());
        for t in rest {
            let c = out.clone_node(n)?;
            hom.insert(c, t.clone());
        }
    }

    let edges: Vec<(ObjectId, ObjectId, ObjectId)> =
        out.edges().map(|(e, x)| (e.clone(), x.source.clone(), x.target.clone())).collect();
    for (e, a, b) in edges {
        match s_minus.edge_between(&hom.node_map[&a], &hom.node_map[&b]) {
            None => {
                out.remove_edge(&e)?;
            }
            Some(f) => prune(&mut out, &e, &s_minus.edge(f).expect("edge").data, mode)?,
        }
    }
    let nodes: Vec<ObjectId> = out.node_ids().cloned().collect();
    for n in nodes {
        prune(&mut out, &n, s_minus.node(&hom.node_map[&n]).expect("typed"), mode)?;
    }

    verify(&out, s_minus, &hom, mode)?;
    Ok(Propagated { graph: out, hom, schema_map: None })
}

fn bad(n: &ObjectId, t: &ObjectId, reason: &str) -> PropagationError {
    PropagationError::BadDirective { node: n.clone(), target: t.clone(), reason: reason.into() }
}

/// Drops keys and values the schema element no longer admits and takes over
/// its mandatory marks.
fn prune(g: &mut PropertyGraph, x: &ObjectId, schema: &ElementData, mode: ValueMode) -> Result<(), PropagationError> {
    let data = g.element(x).expect("element").clone();
    for (k, vals) in data.props.iter() {
        let Some(domain) = schema.props.values(k) else {
            g.unset_property(x, k)?;
            continue;
        };
        let foreign: Vec<&Value> = vals.iter().filter(|v| !value_conforms(mode, v, domain)).collect();
        if !foreign.is_empty() {
            // a mandatory key survives with an empty value set
            if foreign.len() == vals.len() && !schema.mandatory.contains(k) {
                g.unset_property(x, k)?;
            } else {
                g.remove_values(x, k, foreign)?;
            }
        }
    }
    for k in &schema.mandatory {
        if g.element(x).expect("element").props.contains_key(k) {
            g.mark_mandatory(x, k)?;
        } else {
            return Err(PropagationError::Unrepairable(format!("`{x}` lacks mandatory property `{k}`")));
        }
    }
    Ok(())
}

fn verify(g: &PropertyGraph, s: &PropertyGraph, h: &Homomorphism, mode: ValueMode) -> Result<(), PropagationError> {
    let report = check_homomorphism(g, s, h, mode)?;
    match report.violations.first() {
        Some(v) => Err(PropagationError::Unrepairable(v.to_string())),
        None => Ok(()),
    }
}

/// Canonical repair of the schema after the instance was expanded to
/// `g_plus`: untyped nodes get a fresh schema node, nodes with several types
/// merge those types, and missing edges, keys and values are added.
pub fn propagate_to_schema(
    s: &PropertyGraph,
    g_plus: &PropertyGraph,
    h: &Homomorphism,
    fwd_map: &Homomorphism,
    mode: ValueMode,
) -> Result<Propagated, PropagationError> {
    controlled_propagate_to_schema(s, g_plus, h, fwd_map, mode, &PropagationRelation::default())
}

/// As [`propagate_to_schema`], sending the nodes named in `rel.merge_into`
/// to the designated schema node instead of a fresh one.
pub fn controlled_propagate_to_schema(
    s: &PropertyGraph,
    g_plus: &PropertyGraph,
    h: &Homomorphism,
    fwd_map: &Homomorphism,
    mode: ValueMode,
    rel: &PropagationRelation,
) -> Result<Propagated, PropagationError> {
    let typing = TypingRelation::expansive(g_plus, h, fwd_map)?;
    for (n, t) in &rel.merge_into {
        if !g_plus.contains_node(n) {
            return Err(bad(n, t, "no such instance node"));
        }
        if !s.contains_node(t) {
            return Err(bad(n, t, "no such schema node"));
        }
    }
    for t in typing.pairs.iter().map(|(_, t)| t) {
        if !s.contains_node(t) {
            return Err(inconsistent(format!("`{t}` is not a schema node")));
        }
    }

    let mut out = s.clone();
    let mut alias: BTreeMap<ObjectId, ObjectId> = BTreeMap::new();
    let resolve = |alias: &BTreeMap<ObjectId, ObjectId>, t: &ObjectId| {
        let mut t = t.clone();
        while let Some(next) = alias.get(&t) {
            t = next.clone();
        }
        t
    };
    let mut assigned: BTreeMap<ObjectId, ObjectId> = BTreeMap::new();
    for n in g_plus.node_ids() {
        let mut types = typing.types_of(n);
        types.extend(rel.merge_into.get(n).cloned());
        let mut types: Vec<ObjectId> =
            types.iter().map(|t| resolve(&alias, t)).collect::<BTreeSet<_>>().into_iter().collect();
        if types.is_empty() {
            let fresh = out.add_fresh_node(ElementData::default())?;
            types.push(fresh);
        }
        let survivor = types[0].clone();
        for other in &types[1..] {
            out.merge_nodes(&survivor, other)?;
            alias.insert(other.clone(), survivor.clone());
        }
        assigned.insert(n.clone(), survivor);
    }
    let hom = Homomorphism {
        node_map: assigned.iter().map(|(n, t)| (n.clone(), resolve(&alias, t))).collect(),
    };

    for (_, edge) in g_plus.edges() {
        let (a, b) = (&hom.node_map[&edge.source], &hom.node_map[&edge.target]);
        if !out.has_edge_between(a, b) {
            out.add_fresh_edge(a, b, ElementData::default())?;
        }
    }

    let mut relax: BTreeMap<ObjectId, BTreeSet<String>> = BTreeMap::new();
    for (n, data) in g_plus.nodes() {
        let t = &hom.node_map[n];
        enrich(&mut out, t, data, mode)?;
        relax.entry(t.clone()).or_default().extend(unmatched_marks(out.node(t).expect("node"), data));
    }
    for (_, edge) in g_plus.edges() {
        let (a, b) = (&hom.node_map[&edge.source], &hom.node_map[&edge.target]);
        let f = out.edge_between(a, b).expect("added above").clone();
        enrich(&mut out, &f, &edge.data, mode)?;
        relax.entry(f.clone()).or_default().extend(unmatched_marks(&out.edge(&f).expect("edge").data, &edge.data));
    }
    for (t, keys) in relax {
        for k in keys {
            out.unmark_mandatory(&t, &k)?;
        }
    }

    verify(g_plus, &out, &hom, mode)?;
    let schema_map = Homomorphism { node_map: s.node_ids().map(|t| (t.clone(), resolve(&alias, t))).collect() };
    Ok(Propagated { graph: out, hom, schema_map: Some(schema_map) })
}

/// Schema marks the instance element does not carry.
fn unmatched_marks(schema: &ElementData, instance: &ElementData) -> Vec<String> {
    schema.mandatory.difference(&instance.mandatory).cloned().collect()
}

fn enrich(s: &mut PropertyGraph, t: &ObjectId, data: &ElementData, mode: ValueMode) -> Result<(), PropagationError> {
    for (k, vals) in data.props.iter() {
        let domain = s.element(t).expect("schema element").props.values(k).cloned();
        let additions: BTreeSet<Value> = match (domain, mode) {
            (None, ValueMode::Extensional) => vals.clone(),
            (None, ValueMode::Symbolic) => vals.iter().map(|v| DataType::for_tag(v.tag()).token()).collect(),
            (Some(domain), mode) => {
                let novel: BTreeSet<Value> = vals.iter().filter(|v| !value_conforms(mode, v, &domain)).cloned().collect();
                if mode == ValueMode::Symbolic && !novel.is_empty() && domain.iter().any(|v| v.as_type_token().is_some()) {
                    return Err(PropagationError::Unrepairable(format!(
                        "value {} of `{k}` does not have the type declared on `{t}`",
                        novel.first().expect("non-empty")
                    )));
                }
                novel
            }
        };
        if !additions.is_empty() || !s.element(t).expect("schema element").props.contains_key(k) {
            s.add_values(t, k.clone(), additions)?;
        }
    }
    Ok(())
}
