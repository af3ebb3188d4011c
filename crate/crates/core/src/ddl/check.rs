use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::types::GraphType;

/// One violated well-formedness rule of a graph type.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "kebab-case")]
pub enum Diagnostic {
    DuplicateLabel { label: String },
    /// `label` is referenced from `context` but never declared.
    UnknownLabel { label: String, context: String },
    CyclicInheritance { label: String },
    DuplicatePropertyKey { label: String, key: String },
    DuplicateNodeType { label: String },
    /// Two edge types expand to the same pair of schema nodes.
    EdgeCollision { source: String, target: String, kept: String, dropped: String },
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Diagnostic::DuplicateLabel { label } => write!(f, "duplicate-label({label})"),
            Diagnostic::UnknownLabel { label, context } => {
                write!(f, "unknown-label-reference({label}) in {context}")
            }
            Diagnostic::CyclicInheritance { label } => write!(f, "cyclic-inheritance({label})"),
            Diagnostic::DuplicatePropertyKey { label, key } => {
                write!(f, "duplicate-property-key({label}, {key})")
            }
            Diagnostic::DuplicateNodeType { label } => write!(f, "duplicate-node-type({label})"),
            Diagnostic::EdgeCollision { source, target, kept, dropped } => write!(
                f,
                "edge-collision({source} -> {target}): {kept} shadows {dropped}"
            ),
        }
    }
}

/// All well-formedness violations of `gt`; empty iff the graph type is valid.
///
/// Edge collisions are not part of this check: they concern the schema-graph
/// interpretation and are reported by [`interpretation_diagnostics`].
pub fn check_graph_type(gt: &GraphType) -> Vec<Diagnostic> {
    let mut out = Vec::new();

    let mut seen = BTreeSet::new();
    for et in &gt.element_types {
        if !seen.insert(et.label.as_str()) {
            out.push(Diagnostic::DuplicateLabel { label: et.label.clone() });
        }
    }

    for et in &gt.element_types {
        for parent in &et.extends {
            if gt.element(parent).is_none() {
                out.push(Diagnostic::UnknownLabel {
                    label: parent.clone(),
                    context: format!("extends of {}", et.label),
                });
            }
        }
    }
    let mut seen_nodes = BTreeSet::new();
    for nt in &gt.node_types {
        if gt.element(&nt.element).is_none() {
            out.push(Diagnostic::UnknownLabel { label: nt.element.clone(), context: "node type".into() });
        }
        if !seen_nodes.insert(nt.element.as_str()) {
            out.push(Diagnostic::DuplicateNodeType { label: nt.element.clone() });
        }
    }
    for et in &gt.edge_types {
        for end in [&et.source, &et.target] {
            if gt.element(end).is_none() {
                out.push(Diagnostic::UnknownLabel {
                    label: end.clone(),
                    context: format!("edge type {}", et.element),
                });
            }
        }
    }

    let cyclic = cyclic_labels(gt);
    for label in &cyclic {
        out.push(Diagnostic::CyclicInheritance { label: label.clone() });
    }

    for et in &gt.element_types {
        let mut own = BTreeSet::new();
        let mut clash = BTreeSet::new();
        for p in &et.properties {
            if !own.insert(p.key.as_str()) {
                clash.insert(p.key.clone());
            }
        }
        if !cyclic.contains(&et.label) {
            clash.extend(exposure_clashes(gt, &et.label));
        }
        for key in clash {
            out.push(Diagnostic::DuplicatePropertyKey { label: et.label.clone(), key });
        }
    }

    out.sort();
    out.dedup();
    out
}

/// Labels lying on an inheritance cycle.
fn cyclic_labels(gt: &GraphType) -> BTreeSet<String> {
    let parents: BTreeMap<&str, Vec<&str>> = gt
        .element_types
        .iter()
        .map(|e| (e.label.as_str(), e.extends.iter().map(String::as_str).collect()))
        .collect();
    let mut cyclic = BTreeSet::new();
    for &start in parents.keys() {
        let mut stack: Vec<&str> = parents[start].clone();
        let mut visited = BTreeSet::new();
        while let Some(l) = stack.pop() {
            if l == start {
                cyclic.insert(start.to_owned());
                break;
            }
            if visited.insert(l) {
                if let Some(ps) = parents.get(l) {
                    stack.extend(ps.iter().copied());
                }
            }
        }
    }
    cyclic
}

/// Keys exposed by `label` with two different data types.
fn exposure_clashes(gt: &GraphType, label: &str) -> BTreeSet<String> {
    let Ok(exposed) = gt.exposed(label) else { return BTreeSet::new() };
    let mut types: BTreeMap<&str, BTreeSet<_>> = BTreeMap::new();
    for l in &exposed.labels {
        if let Some(et) = gt.element(l) {
            for p in &et.properties {
                types.entry(p.key.as_str()).or_default().insert(p.data_type);
            }
        }
    }
    types
        .into_iter()
        .filter(|(_, ts)| ts.len() > 1)
        .map(|(k, _)| k.to_owned())
        .collect()
}

/// Problems of the schema-graph reading of an otherwise valid graph type.
pub fn interpretation_diagnostics(gt: &GraphType) -> Vec<Diagnostic> {
    super::bridge::expand_edges(gt).1
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ddl::parse_ddl_unchecked;

    fn diags(text: &str) -> Vec<Diagnostic> {
        check_graph_type(&parse_ddl_unchecked(text).unwrap())
    }

    #[test]
    fn self_extension() {
        assert_eq!(
            diags("CREATE GRAPH TYPE g ( A <: A {} )"),
            vec![Diagnostic::CyclicInheritance { label: "A".into() }]
        );
    }

    #[test]
    fn indirect_cycle_reports_each_member() {
        let d = diags("CREATE GRAPH TYPE g ( A <: B {}, B <: A {}, C <: A {} )");
        assert_eq!(
            d,
            vec![
                Diagnostic::CyclicInheritance { label: "A".into() },
                Diagnostic::CyclicInheritance { label: "B".into() },
            ]
        );
    }

    #[test]
    fn exposed_key_clash() {
        assert_eq!(
            diags("CREATE GRAPH TYPE g ( A { x : STRING }, B <: A { x : INTEGER } )"),
            vec![Diagnostic::DuplicatePropertyKey { label: "B".into(), key: "x".into() }]
        );
    }

    #[test]
    fn same_property_type_redeclared_is_fine() {
        assert!(diags("CREATE GRAPH TYPE g ( A { x : STRING }, B <: A { x : STRING? } )").is_empty());
    }

    #[test]
    fn duplicates_and_unknowns() {
        let d = diags(
            "CREATE GRAPH TYPE g ( A { k : STRING, k : STRING }, A {}, (A), (A), (Z), (A)-[E]->(Y), B <: X {} )",
        );
        assert!(d.contains(&Diagnostic::DuplicateLabel { label: "A".into() }));
        assert!(d.contains(&Diagnostic::DuplicatePropertyKey { label: "A".into(), key: "k".into() }));
        assert!(d.contains(&Diagnostic::DuplicateNodeType { label: "A".into() }));
        assert!(d.iter().any(|x| matches!(x, Diagnostic::UnknownLabel { label, .. } if label == "Z")));
        assert!(d.iter().any(|x| matches!(x, Diagnostic::UnknownLabel { label, .. } if label == "Y")));
        assert!(d.iter().any(|x| matches!(x, Diagnostic::UnknownLabel { label, .. } if label == "X")));
        assert!(!d.iter().any(|x| matches!(x, Diagnostic::UnknownLabel { label, .. } if label == "E")));
    }
}
