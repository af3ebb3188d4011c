//! Rewriting rules `L <- P -> R`, injective matchings and their two-phase
//! application through elementary graph transformations.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::RewriteError;
use crate::graph::{ElementData, ObjectId, PropertyGraph};
use crate::hom::{
    check_homomorphism_with, find_injective_matches, CheckOptions, Homomorphism, MandatoryRule, ValueMode,
};
use crate::value::Value;

/// An injective homomorphism from a rule's left-hand side into a host graph.
pub type Matching = Homomorphism;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RuleFile", into = "RuleFile")]
pub struct Rule {
    pub lhs: PropertyGraph,
    pub preserved: PropertyGraph,
    pub rhs: PropertyGraph,
    pub l_map: Homomorphism,
    pub r_map: Homomorphism,
}

#[derive(Clone, Serialize, Deserialize)]
struct RuleFile {
    lhs: PropertyGraph,
    preserved: PropertyGraph,
    rhs: PropertyGraph,
    l_map: BTreeMap<ObjectId, ObjectId>,
    r_map: BTreeMap<ObjectId, ObjectId>,
}

impl TryFrom<RuleFile> for Rule {
    type Error = RewriteError;

    fn try_from(f: RuleFile) -> Result<Self, Self::Error> {
        Rule::new(
            f.lhs,
            f.preserved,
            f.rhs,
            Homomorphism { node_map: f.l_map },
            Homomorphism { node_map: f.r_map },
        )
    }
}

impl From<Rule> for RuleFile {
    fn from(r: Rule) -> Self {
        RuleFile { lhs: r.lhs, preserved: r.preserved, rhs: r.rhs, l_map: r.l_map.node_map, r_map: r.r_map.node_map }
    }
}

const STRUCTURAL: CheckOptions = CheckOptions { mode: ValueMode::Extensional, mandatory: MandatoryRule::Ignore };

impl Rule {
    pub fn new(
        lhs: PropertyGraph,
        preserved: PropertyGraph,
        rhs: PropertyGraph,
        l_map: Homomorphism,
        r_map: Homomorphism,
    ) -> Result<Self, RewriteError> {
        for (name, map, target) in [("l", &l_map, &lhs), ("r", &r_map, &rhs)] {
            let report = check_homomorphism_with(&preserved, target, map, STRUCTURAL)
                .map_err(|e| RewriteError::InvalidRule(format!("{name}: {e}")))?;
            if let Some(v) = report.violations.first() {
                return Err(RewriteError::InvalidRule(format!("{name}: {v}")));
            }
        }
        Ok(Rule { lhs, preserved, rhs, l_map, r_map })
    }

    /// The rule `G <- G -> G`.
    pub fn identity(g: &PropertyGraph) -> Self {
        let id = Homomorphism::identity(g);
        Rule { lhs: g.clone(), preserved: g.clone(), rhs: g.clone(), l_map: id.clone(), r_map: id }
    }

    /// Only deletions and clones: `r` is the identity and `R = P`.
    pub fn is_restrictive(&self) -> bool {
        self.r_map.is_identity() && self.rhs == self.preserved
    }

    /// Only additions and merges: `l` is the identity and `L = P`.
    pub fn is_expansive(&self) -> bool {
        self.l_map.is_identity() && self.lhs == self.preserved
    }

    /// `L <- P -> P`.
    pub fn restrictive_part(&self) -> Rule {
        Rule {
            lhs: self.lhs.clone(),
            preserved: self.preserved.clone(),
            rhs: self.preserved.clone(),
            l_map: self.l_map.clone(),
            r_map: Homomorphism::identity(&self.preserved),
        }
    }

    /// `P <- P -> R`.
    pub fn expansive_part(&self) -> Rule {
        Rule {
            lhs: self.preserved.clone(),
            preserved: self.preserved.clone(),
            rhs: self.rhs.clone(),
            l_map: Homomorphism::identity(&self.preserved),
            r_map: self.r_map.clone(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self, RewriteError> {
        let f: RuleFile = serde_json::from_str(text).map_err(|e| RewriteError::Json(e.to_string()))?;
        f.try_into()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&RuleFile::from(self.clone())).expect("rule serializes")
    }
}

/// A node, or the edge between two nodes, of some rule graph.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ElementRef {
    Node(ObjectId),
    Edge(ObjectId, ObjectId),
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EditAction {
    RemoveKey,
    RemoveValues(BTreeSet<Value>),
    Unmark,
    AddValues(BTreeSet<Value>),
    Mark,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PropertyEdit {
    pub element: ElementRef,
    pub key: String,
    pub action: EditAction,
}

/// An edge of `L` dropped between two preserved nodes.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EdgeDelete {
    pub lhs_edge: ObjectId,
    pub source: ObjectId,
    pub target: ObjectId,
}

/// The elementary transformations read off a rule.
///
/// Deletions and removal edits refer to `P` elements, clones to `L` nodes,
/// merges to groups of `P` nodes, additions and add edits to `R` elements.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ActionPlan {
    pub node_deletes: Vec<ObjectId>,
    pub edge_deletes: Vec<EdgeDelete>,
    pub property_deletes: Vec<PropertyEdit>,
    pub clones: Vec<(ObjectId, usize)>,
    pub merges: Vec<Vec<ObjectId>>,
    pub node_adds: Vec<ObjectId>,
    pub edge_adds: Vec<ObjectId>,
    pub property_adds: Vec<PropertyEdit>,
}

impl ActionPlan {
    pub fn is_empty(&self) -> bool {
        self.node_deletes.is_empty()
            && self.edge_deletes.is_empty()
            && self.property_deletes.is_empty()
            && self.clones.is_empty()
            && self.merges.is_empty()
            && self.node_adds.is_empty()
            && self.edge_adds.is_empty()
            && self.property_adds.is_empty()
    }

    /// Net change in node count when the plan is applied.
    pub fn node_delta(&self) -> isize {
        let cloned: usize = self.clones.iter().map(|(_, k)| k).sum();
        let merged: usize = self.merges.iter().map(|g| g.len() - 1).sum();
        cloned as isize + self.node_adds.len() as isize - self.node_deletes.len() as isize - merged as isize
    }
}

fn shrink_edits(element: ElementRef, from: &ElementData, to: &ElementData, out: &mut Vec<PropertyEdit>) {
    let edit = |key: &str, action| PropertyEdit { element: element.clone(), key: key.to_owned(), action };
    for (k, vals) in from.props.iter() {
        match to.props.values(k) {
            None => out.push(edit(k, EditAction::RemoveKey)),
            Some(kept) => {
                let gone: BTreeSet<Value> = vals.difference(kept).cloned().collect();
                if !gone.is_empty() {
                    out.push(edit(k, EditAction::RemoveValues(gone)));
                }
                if from.is_mandatory(k) && !to.is_mandatory(k) {
                    out.push(edit(k, EditAction::Unmark));
                }
            }
        }
    }
    for k in to.mandatory.difference(&from.mandatory) {
        out.push(edit(k, EditAction::Mark));
    }
}

fn grow_edits(element: ElementRef, from: &ElementData, to: &ElementData, out: &mut Vec<PropertyEdit>) {
    let edit = |key: &str, action| PropertyEdit { element: element.clone(), key: key.to_owned(), action };
    for (k, vals) in to.props.iter() {
        let fresh: BTreeSet<Value> = match from.props.values(k) {
            Some(old) => vals.difference(old).cloned().collect(),
            None => vals.clone(),
        };
        if !fresh.is_empty() || !from.props.contains_key(k) {
            out.push(edit(k, EditAction::AddValues(fresh)));
        }
    }
    for k in from.mandatory.difference(&to.mandatory) {
        out.push(edit(k, EditAction::Unmark));
    }
    for k in to.mandatory.difference(&from.mandatory) {
        out.push(edit(k, EditAction::Mark));
    }
}

/// Union of the data of several elements.
fn joined<'a>(items: impl IntoIterator<Item = &'a ElementData>) -> ElementData {
    let mut out = ElementData::default();
    for d in items {
        out.union_with(d);
    }
    out
}

fn edge_data<'a>(g: &'a PropertyGraph, s: &ObjectId, t: &ObjectId) -> Option<&'a ElementData> {
    g.edge_between(s, t).map(|e| &g.edge(e).expect("edge").data)
}

/// Reads the elementary transformations off a rule.
pub fn derive_actions(rule: &Rule) -> ActionPlan {
    let mut plan = ActionPlan::default();
    let (l, p, r) = (&rule.lhs, &rule.preserved, &rule.rhs);

    for x in l.node_ids() {
        let fibre = rule.l_map.preimage(x);
        match fibre.len() {
            0 => plan.node_deletes.push(x.clone()),
            1 => {}
            n => plan.clones.push((x.clone(), n - 1)),
        }
    }
    for (pn, pd) in p.nodes() {
        let ln = &rule.l_map.node_map[pn];
        shrink_edits(ElementRef::Node(pn.clone()), l.node(ln).expect("l image"), pd, &mut plan.property_deletes);
    }
    let p_nodes: Vec<&ObjectId> = p.node_ids().collect();
    for a in &p_nodes {
        for b in &p_nodes {
            let (la, lb) = (&rule.l_map.node_map[*a], &rule.l_map.node_map[*b]);
            let l_edges: Vec<&ObjectId> = l.edges_between(la, lb).collect();
            let kept = p.edges_between(a, b).count();
            for le in l_edges.iter().skip(kept) {
                plan.edge_deletes.push(EdgeDelete {
                    lhs_edge: (*le).clone(),
                    source: (*a).clone(),
                    target: (*b).clone(),
                });
            }
            if let (Some(pd), Some(ld)) = (edge_data(p, a, b), edge_data(l, la, lb)) {
                shrink_edits(
                    ElementRef::Edge((*a).clone(), (*b).clone()),
                    ld,
                    pd,
                    &mut plan.property_deletes,
                );
            }
        }
    }

    for (x, xd) in r.nodes() {
        let fibre = rule.r_map.preimage(x);
        if fibre.is_empty() {
            plan.node_adds.push(x.clone());
            continue;
        }
        if fibre.len() > 1 {
            plan.merges.push(fibre.clone());
        }
        let before = joined(fibre.iter().map(|q| p.node(q).expect("p node")));
        grow_edits(ElementRef::Node(x.clone()), &before, xd, &mut plan.property_adds);
    }
    for (re, edge) in r.edges() {
        let sources = rule.r_map.preimage(&edge.source);
        let targets = rule.r_map.preimage(&edge.target);
        let pre: Vec<&ElementData> = sources
            .iter()
            .flat_map(|a| targets.iter().map(move |b| (a, b)))
            .flat_map(|(a, b)| p.edges_between(a, b).map(|e| &p.edge(e).expect("edge").data).collect::<Vec<_>>())
            .collect();
        if pre.is_empty() {
            plan.edge_adds.push(re.clone());
        } else {
            grow_edits(
                ElementRef::Edge(edge.source.clone(), edge.target.clone()),
                &joined(pre),
                &edge.data,
                &mut plan.property_adds,
            );
        }
    }
    plan
}

/// Checks that `m` is an injective, total matching of `lhs` into `g` in
/// which mandatory properties of the pattern land on mandatory properties.
pub fn check_matching(lhs: &PropertyGraph, g: &PropertyGraph, m: &Matching) -> Result<(), RewriteError> {
    if !m.is_injective() {
        return Err(RewriteError::InvalidMatching("not injective".into()));
    }
    let opts = CheckOptions { mode: ValueMode::Extensional, mandatory: MandatoryRule::SourceImpliesTarget };
    let report =
        check_homomorphism_with(lhs, g, m, opts).map_err(|e| RewriteError::InvalidMatching(e.to_string()))?;
    match report.violations.first() {
        Some(v) => Err(RewriteError::InvalidMatching(v.to_string())),
        None => Ok(()),
    }
}

/// All matchings of the rule's left-hand side into `g`, in a fixed order.
pub fn find_matchings(rule: &Rule, g: &PropertyGraph) -> Vec<Matching> {
    find_injective_matches(&rule.lhs, g, None)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Restricted {
    pub graph: PropertyGraph,
    /// `P -> G-`.
    pub matching: Matching,
    /// `G- -> G`: clones go to their original.
    pub back_map: Homomorphism,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Expanded {
    pub graph: PropertyGraph,
    /// `R -> G+`.
    pub matching: Matching,
    /// `G- -> G+`: merged nodes go to the survivor.
    pub fwd_map: Homomorphism,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RuleApplication {
    pub restricted: Restricted,
    pub expanded: Expanded,
}

impl RuleApplication {
    pub fn graph(&self) -> &PropertyGraph {
        &self.expanded.graph
    }
}

fn host_element(g: &PropertyGraph, m: &Homomorphism, e: &ElementRef) -> Option<ObjectId> {
    match e {
        ElementRef::Node(n) => m.get(n).cloned(),
        ElementRef::Edge(a, b) => g.edge_between(m.get(a)?, m.get(b)?).cloned(),
    }
}

fn apply_edit(g: &mut PropertyGraph, target: &ObjectId, edit: &PropertyEdit) -> Result<(), RewriteError> {
    match &edit.action {
        EditAction::RemoveKey => {
            g.unset_property(target, &edit.key)?;
        }
        EditAction::RemoveValues(vs) => g.remove_values(target, &edit.key, vs)?,
        EditAction::Unmark => g.unmark_mandatory(target, &edit.key)?,
        EditAction::AddValues(vs) => g.add_values(target, edit.key.clone(), vs.iter().cloned())?,
        EditAction::Mark => g.mark_mandatory(target, &edit.key)?,
    }
    Ok(())
}

/// Deletes and clones according to a restrictive rule.
pub fn apply_restrictive(g: &PropertyGraph, rule: &Rule, m: &Matching) -> Result<Restricted, RewriteError> {
    if !rule.is_restrictive() {
        return Err(RewriteError::InvalidRuleClass("restrictive"));
    }
    check_matching(&rule.lhs, g, m)?;
    let plan = derive_actions(rule);
    let mut out = g.clone();

    for x in &plan.node_deletes {
        out.remove_node(&m.node_map[x])?;
    }
    let mut back = BTreeMap::new();
    let mut m_minus = Homomorphism::new();
    for x in rule.lhs.node_ids() {
        let host = &m.node_map[x];
        for (i, pn) in rule.l_map.preimage(x).into_iter().enumerate() {
            let image = if i == 0 { host.clone() } else { out.clone_node(host)? };
            back.insert(image.clone(), host.clone());
            m_minus.insert(pn, image);
        }
    }
    for d in &plan.edge_deletes {
        let (a, b) = (&m_minus.node_map[&d.source], &m_minus.node_map[&d.target]);
        if let Some(e) = out.edge_between(a, b).cloned() {
            out.remove_edge(&e)?;
        }
    }
    for edit in &plan.property_deletes {
        if let Some(target) = host_element(&out, &m_minus, &edit.element) {
            apply_edit(&mut out, &target, edit)?;
        }
    }
    let back_map = Homomorphism {
        node_map: out.node_ids().map(|n| (n.clone(), back.get(n).unwrap_or(n).clone())).collect(),
    };
    Ok(Restricted { graph: out, matching: m_minus, back_map })
}

/// Merges and adds according to an expansive rule.
pub fn apply_expansive(g: &PropertyGraph, rule: &Rule, m: &Matching) -> Result<Expanded, RewriteError> {
    if !rule.is_expansive() {
        return Err(RewriteError::InvalidRuleClass("expansive"));
    }
    check_matching(&rule.preserved, g, m)?;
    let plan = derive_actions(rule);
    let mut out = g.clone();
    let mut fwd: BTreeMap<ObjectId, ObjectId> = g.node_ids().map(|n| (n.clone(), n.clone())).collect();

    for group in &plan.merges {
        let mut hosts: Vec<ObjectId> = group.iter().map(|p| m.node_map[p].clone()).collect();
        hosts.sort();
        let survivor = hosts[0].clone();
        for other in &hosts[1..] {
            out.merge_nodes(&survivor, other)?;
            fwd.insert(other.clone(), survivor.clone());
        }
    }

    let mut m_plus = Homomorphism::new();
    for x in rule.rhs.node_ids() {
        if let Some(p) = rule.r_map.preimage(x).first() {
            m_plus.insert(x.clone(), fwd[&m.node_map[p]].clone());
        }
    }
    for x in &plan.node_adds {
        let id = out.add_fresh_node(rule.rhs.node(x).expect("r node").clone())?;
        m_plus.insert(x.clone(), id);
    }
    for re in &plan.edge_adds {
        let edge = rule.rhs.edge(re).expect("r edge");
        let (a, b) = (&m_plus.node_map[&edge.source], &m_plus.node_map[&edge.target]);
        match out.edge_between(a, b).cloned() {
            Some(existing) if out.is_simple() => out.merge_data_into(&existing, &edge.data)?,
            _ => {
                out.add_fresh_edge(a, b, edge.data.clone())?;
            }
        }
    }
    for edit in &plan.property_adds {
        if let Some(target) = host_element(&out, &m_plus, &edit.element) {
            apply_edit(&mut out, &target, edit)?;
        }
    }
    Ok(Expanded { graph: out, matching: m_plus, fwd_map: Homomorphism { node_map: fwd } })
}

/// The restrictive phase followed by the expansive phase.
pub fn apply_rule(g: &PropertyGraph, rule: &Rule, m: &Matching) -> Result<RuleApplication, RewriteError> {
    let restricted = apply_restrictive(g, &rule.restrictive_part(), m)?;
    let expanded = apply_expansive(&restricted.graph, &rule.expansive_part(), &restricted.matching)?;
    Ok(RuleApplication { restricted, expanded })
}

/// Whether `h_L ∘ l = h_R ∘ r` on every preserved node.
pub fn rule_respects_schema(rule: &Rule, _s: &PropertyGraph, h_l: &Homomorphism, h_r: &Homomorphism) -> bool {
    rule.preserved.node_ids().all(|p| {
        let via_l = rule.l_map.get(p).and_then(|x| h_l.get(x));
        let via_r = rule.r_map.get(p).and_then(|x| h_r.get(x));
        via_l.is_some() && via_l == via_r
    })
}
