//! Homomorphisms between property graphs: validation, search and composition.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::HomError;
use crate::graph::{ElementData, ObjectId, PropertyGraph};
use crate::value::Value;

/// How a schema's value sets constrain instance values.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ValueMode {
    /// Schema value sets hold type tokens such as `$STRING$`.
    #[default]
    Symbolic,
    /// Schema value sets enumerate the admitted values.
    Extensional,
}

impl FromStr for ValueMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "symbolic" => Ok(ValueMode::Symbolic),
            "extensional" => Ok(ValueMode::Extensional),
            other => Err(format!("unknown value mode `{other}`")),
        }
    }
}

impl fmt::Display for ValueMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ValueMode::Symbolic => "symbolic",
            ValueMode::Extensional => "extensional",
        })
    }
}

/// Whether `v` is admitted by a schema value set.
pub fn value_conforms(mode: ValueMode, v: &Value, domain: &BTreeSet<Value>) -> bool {
    if domain.contains(v) {
        return true;
    }
    match mode {
        ValueMode::Extensional => false,
        ValueMode::Symbolic => domain
            .iter()
            .filter_map(Value::as_type_token)
            .any(|t| t.accepts(v)),
    }
}

/// A node map between two graphs. For simple graphs the edge map is implied.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Homomorphism {
    pub node_map: BTreeMap<ObjectId, ObjectId>,
}

impl Homomorphism {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs<A: Into<ObjectId>, B: Into<ObjectId>>(pairs: impl IntoIterator<Item = (A, B)>) -> Self {
        Homomorphism { node_map: pairs.into_iter().map(|(a, b)| (a.into(), b.into())).collect() }
    }

    pub fn identity(g: &PropertyGraph) -> Self {
        Homomorphism { node_map: g.node_ids().map(|n| (n.clone(), n.clone())).collect() }
    }

    pub fn get(&self, n: &ObjectId) -> Option<&ObjectId> {
        self.node_map.get(n)
    }

    pub fn insert(&mut self, from: ObjectId, to: ObjectId) {
        self.node_map.insert(from, to);
    }

    pub fn len(&self) -> usize {
        self.node_map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.node_map.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&ObjectId, &ObjectId)> {
        self.node_map.iter()
    }

    pub fn is_injective(&self) -> bool {
        let images: BTreeSet<&ObjectId> = self.node_map.values().collect();
        images.len() == self.node_map.len()
    }

    pub fn is_identity(&self) -> bool {
        self.node_map.iter().all(|(a, b)| a == b)
    }

    /// Nodes mapped onto `target`, in id order.
    pub fn preimage(&self, target: &ObjectId) -> Vec<ObjectId> {
        self.node_map
            .iter()
            .filter(|(_, t)| *t == target)
            .map(|(s, _)| s.clone())
            .collect()
    }

    /// The target edge an edge of `g` is sent to: the smallest edge between
    /// the images of its endpoints.
    pub fn edge_image(&self, g: &PropertyGraph, s: &PropertyGraph, e: &ObjectId) -> Option<ObjectId> {
        let edge = g.edge(e)?;
        let (a, b) = (self.get(&edge.source)?, self.get(&edge.target)?);
        s.edge_between(a, b).cloned()
    }

    pub fn from_json(text: &str) -> Result<Self, HomError> {
        serde_json::from_str(text).map_err(|e| HomError::Json(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("map serializes")
    }
}

/// `h2 ∘ h1`.
pub fn compose(h1: &Homomorphism, h2: &Homomorphism) -> Result<Homomorphism, HomError> {
    let mut out = Homomorphism::new();
    for (a, b) in &h1.node_map {
        let c = h2.get(b).ok_or_else(|| HomError::MismatchedGraphs(b.clone()))?;
        out.insert(a.clone(), c.clone());
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Condition {
    /// An edge whose endpoint images are not joined by an edge.
    Structure,
    /// (i) a key absent from the image.
    Keys,
    /// (ii) a value not admitted by the image.
    Values,
    /// (iii) a mandatory property of the image not mandatory on the element.
    Mandatory,
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Condition::Structure => "structure",
            Condition::Keys => "keys",
            Condition::Values => "values",
            Condition::Mandatory => "mandatory",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Violation {
    pub condition: Condition,
    pub element: ObjectId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<ObjectId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub key: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<Value>,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} violation at {}", self.condition, self.element)?;
        if let Some(t) = &self.target {
            write!(f, " (image {t})")?;
        }
        if let Some(k) = &self.key {
            write!(f, ", key {k}")?;
        }
        if let Some(v) = &self.value {
            write!(f, ", value {v}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub valid: bool,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    fn from_violations(mut violations: Vec<Violation>) -> Self {
        violations.sort();
        ValidationReport { valid: violations.is_empty(), violations }
    }

    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn count(&self, condition: Condition) -> usize {
        self.violations.iter().filter(|v| v.condition == condition).count()
    }
}

/// Direction in which mandatory marks must be respected.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MandatoryRule {
    /// Mandatory on the image implies mandatory on the element (typing).
    TargetImpliesSource,
    /// Mandatory on the element implies mandatory on the image (matching).
    SourceImpliesTarget,
    Ignore,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CheckOptions {
    pub mode: ValueMode,
    pub mandatory: MandatoryRule,
}

impl CheckOptions {
    pub fn typing(mode: ValueMode) -> Self {
        CheckOptions { mode, mandatory: MandatoryRule::TargetImpliesSource }
    }
}

/// Every violation of the homomorphism conditions by `h : g -> s`.
pub fn check_homomorphism(
    g: &PropertyGraph,
    s: &PropertyGraph,
    h: &Homomorphism,
    mode: ValueMode,
) -> Result<ValidationReport, HomError> {
    check_homomorphism_with(g, s, h, CheckOptions::typing(mode))
}

pub fn check_homomorphism_with(
    g: &PropertyGraph,
    s: &PropertyGraph,
    h: &Homomorphism,
    opts: CheckOptions,
) -> Result<ValidationReport, HomError> {
    for (a, b) in &h.node_map {
        if !g.contains_node(a) {
            return Err(HomError::UnknownSource(a.clone()));
        }
        if !s.contains_node(b) {
            return Err(HomError::DanglingMap { node: a.clone(), target: b.clone() });
        }
    }
    if let Some(n) = g.node_ids().find(|n| h.get(n).is_none()) {
        return Err(HomError::NotTotal(n.clone()));
    }

    let mut out = Vec::new();
    for (n, data) in g.nodes() {
        let t = &h.node_map[n];
        element_violations(n, data, t, s.node(t).unwrap(), opts, &mut out);
    }
    for (e, edge) in g.edges() {
        let (a, b) = (&h.node_map[&edge.source], &h.node_map[&edge.target]);
        let candidates: Vec<&ObjectId> = s.edges_between(a, b).collect();
        if candidates.is_empty() {
            out.push(Violation { condition: Condition::Structure, element: e.clone(), target: None, key: None, value: None });
            continue;
        }
        let mut best: Option<Vec<Violation>> = None;
        for f in candidates {
            let mut vs = Vec::new();
            element_violations(e, &edge.data, f, &s.edge(f).unwrap().data, opts, &mut vs);
            if best.as_ref().is_none_or(|b| vs.len() < b.len()) {
                best = Some(vs);
            }
        }
        out.extend(best.unwrap());
    }
    Ok(ValidationReport::from_violations(out))
}

fn element_violations(
    x: &ObjectId,
    dx: &ElementData,
    t: &ObjectId,
    dt: &ElementData,
    opts: CheckOptions,
    out: &mut Vec<Violation>,
) {
    let v = |condition, key: &str, value: Option<&Value>| Violation {
        condition,
        element: x.clone(),
        target: Some(t.clone()),
        key: Some(key.to_owned()),
        value: value.cloned(),
    };
    for (k, vals) in dx.props.iter() {
        let Some(domain) = dt.props.values(k) else {
            out.push(v(Condition::Keys, k, None));
            continue;
        };
        for val in vals {
            if !value_conforms(opts.mode, val, domain) {
                out.push(v(Condition::Values, k, Some(val)));
            }
        }
    }
    match opts.mandatory {
        MandatoryRule::TargetImpliesSource => {
            for k in &dt.mandatory {
                if !dx.mandatory.contains(k) {
                    out.push(v(Condition::Mandatory, k, None));
                }
            }
        }
        MandatoryRule::SourceImpliesTarget => {
            for k in &dx.mandatory {
                if !dt.mandatory.contains(k) {
                    out.push(v(Condition::Mandatory, k, None));
                }
            }
        }
        MandatoryRule::Ignore => {}
    }
}

/// All homomorphisms `g -> s` in lexicographic order of node images, or the
/// first `limit` of them.
pub fn find_homomorphisms(
    g: &PropertyGraph,
    s: &PropertyGraph,
    mode: ValueMode,
    limit: Option<usize>,
) -> Vec<Homomorphism> {
    Search::new(g, s, SearchKind::Typing(mode), limit).run()
}

/// Injective maps `pattern -> host` with exact value containment in which
/// every mandatory property of the pattern lands on a mandatory property.
pub fn find_injective_matches(pattern: &PropertyGraph, host: &PropertyGraph, limit: Option<usize>) -> Vec<Homomorphism> {
    Search::new(pattern, host, SearchKind::Pattern, limit).run()
}

#[derive(Clone, Copy)]
enum SearchKind {
    Typing(ValueMode),
    Pattern,
}

struct Search<'a> {
    g: &'a PropertyGraph,
    s: &'a PropertyGraph,
    kind: SearchKind,
    limit: Option<usize>,
    order: Vec<&'a ObjectId>,
    targets: Vec<&'a ObjectId>,
    assignment: Vec<&'a ObjectId>,
    found: Vec<Homomorphism>,
}

impl<'a> Search<'a> {
    fn new(g: &'a PropertyGraph, s: &'a PropertyGraph, kind: SearchKind, limit: Option<usize>) -> Self {
        Search {
            g,
            s,
            kind,
            limit,
            order: g.node_ids().collect(),
            targets: s.node_ids().collect(),
            assignment: Vec::new(),
            found: Vec::new(),
        }
    }

    fn run(mut self) -> Vec<Homomorphism> {
        if self.limit != Some(0) {
            self.descend();
        }
        self.found
    }

    fn done(&self) -> bool {
        self.limit.is_some_and(|l| self.found.len() >= l)
    }

    fn descend(&mut self) {
        let depth = self.assignment.len();
        if depth == self.order.len() {
            let map = self.order.iter().zip(&self.assignment).map(|(a, b)| ((*a).clone(), (*b).clone()));
            self.found.push(Homomorphism { node_map: map.collect() });
            return;
        }
        let x = self.order[depth];
        for i in 0..self.targets.len() {
            let t = self.targets[i];
            if matches!(self.kind, SearchKind::Pattern) && self.assignment.contains(&t) {
                continue;
            }
            if !self.admits(self.g.node(x).unwrap(), self.s.node(t).unwrap()) {
                continue;
            }
            self.assignment.push(t);
            if self.edges_ok(depth) {
                self.descend();
            }
            self.assignment.pop();
            if self.done() {
                return;
            }
        }
    }

    /// Edges between the newest node and every assigned node (itself included).
    fn edges_ok(&self, depth: usize) -> bool {
        let x = self.order[depth];
        let tx = self.assignment[depth];
        for j in 0..=depth {
            let (y, ty) = (self.order[j], self.assignment[j]);
            let pairs: &[(&ObjectId, &ObjectId, &ObjectId, &ObjectId)] =
                if j == depth { &[(x, x, tx, tx)] } else { &[(x, y, tx, ty), (y, x, ty, tx)] };
            for &(a, b, ta, tb) in pairs {
                for e in self.g.edges_between(a, b) {
                    let de = &self.g.edge(e).unwrap().data;
                    let ok = self
                        .s
                        .edges_between(ta, tb)
                        .any(|f| self.admits(de, &self.s.edge(f).unwrap().data));
                    if !ok {
                        return false;
                    }
                }
            }
        }
        true
    }

    fn admits(&self, x: &ElementData, t: &ElementData) -> bool {
        for (k, vals) in x.props.iter() {
            let Some(domain) = t.props.values(k) else { return false };
            let all_in = match self.kind {
                SearchKind::Pattern | SearchKind::Typing(ValueMode::Extensional) => vals.is_subset(domain),
                SearchKind::Typing(ValueMode::Symbolic) => vals.iter().all(|v| {
                    domain.contains(v)
                        || domain.iter().any(|d| d.as_type_token().is_some_and(|ty| ty.accepts(v)))
                }),
            };
            if !all_in {
                return false;
            }
        }
        match self.kind {
            SearchKind::Typing(_) => t.mandatory.is_subset(&x.mandatory),
            SearchKind::Pattern => x.mandatory.is_subset(&t.mandatory),
        }
    }
}
