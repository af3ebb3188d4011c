use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::DdlError;
use crate::value::DataType;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PropertyType {
    pub key: String,
    pub data_type: DataType,
    /// `?` suffix: the property may be absent.
    #[serde(default)]
    pub optional: bool,
}

impl PropertyType {
    pub fn new(key: impl Into<String>, data_type: DataType, optional: bool) -> Self {
        PropertyType { key: key.into(), data_type, optional }
    }

    pub fn mandatory(key: impl Into<String>, data_type: DataType) -> Self {
        Self::new(key, data_type, false)
    }

    pub fn optional(key: impl Into<String>, data_type: DataType) -> Self {
        Self::new(key, data_type, true)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ElementType {
    pub label: String,
    /// Own properties, in declaration order.
    #[serde(default)]
    pub properties: Vec<PropertyType>,
    #[serde(default)]
    pub extends: Vec<String>,
    /// `FINAL` marker; recorded, never enforced.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub is_final: bool,
}

impl ElementType {
    pub fn new(label: impl Into<String>) -> Self {
        ElementType { label: label.into(), properties: Vec::new(), extends: Vec::new(), is_final: false }
    }

    pub fn with_property(mut self, p: PropertyType) -> Self {
        self.properties.push(p);
        self
    }

    pub fn extending(mut self, parent: impl Into<String>) -> Self {
        self.extends.push(parent.into());
        self
    }

    fn normalized(&self) -> (String, BTreeSet<PropertyType>, BTreeSet<String>, bool) {
        (
            self.label.clone(),
            self.properties.iter().cloned().collect(),
            self.extends.iter().cloned().collect(),
            self.is_final,
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct NodeType {
    pub element: String,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct EdgeType {
    pub source: String,
    pub element: String,
    pub target: String,
    /// The `<n>` annotation after the arrow; carried as metadata only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cardinality: Option<u32>,
}

impl EdgeType {
    pub fn new(source: impl Into<String>, element: impl Into<String>, target: impl Into<String>) -> Self {
        EdgeType { source: source.into(), element: element.into(), target: target.into(), cardinality: None }
    }
}

/// A property graph type: element, node and edge types.
///
/// Equality ignores declaration order.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct GraphType {
    pub name: String,
    #[serde(default)]
    pub element_types: Vec<ElementType>,
    #[serde(default)]
    pub node_types: Vec<NodeType>,
    #[serde(default)]
    pub edge_types: Vec<EdgeType>,
}

#[allow(clippy::type_complexity)]
impl GraphType {
    pub fn new(name: impl Into<String>) -> Self {
        GraphType { name: name.into(), ..Default::default() }
    }

    fn normalized(
        &self,
    ) -> (
        &str,
        BTreeSet<(String, BTreeSet<PropertyType>, BTreeSet<String>, bool)>,
        BTreeSet<&NodeType>,
        BTreeSet<&EdgeType>,
    ) {
        (
            &self.name,
            self.element_types.iter().map(ElementType::normalized).collect(),
            self.node_types.iter().collect(),
            self.edge_types.iter().collect(),
        )
    }

    pub fn element(&self, label: &str) -> Option<&ElementType> {
        self.element_types.iter().find(|e| e.label == label)
    }

    /// Labels used as the middle of an edge type without an element-type
    /// declaration. They behave as element types with no properties.
    pub fn implicit_edge_labels(&self) -> BTreeSet<&str> {
        self.edge_types
            .iter()
            .map(|e| e.element.as_str())
            .filter(|l| self.element(l).is_none())
            .collect()
    }

    /// Whether `label` names a declared or implicit element type.
    pub fn has_label(&self, label: &str) -> bool {
        self.element(label).is_some() || self.implicit_edge_labels().contains(label)
    }

    /// Exposed properties, mandatory properties and labels of `label`.
    pub fn exposed(&self, label: &str) -> Result<Exposed, DdlError> {
        if !self.has_label(label) {
            return Err(DdlError::UnknownLabel(label.to_owned()));
        }
        let mut labels = BTreeSet::new();
        let mut stack = vec![label.to_owned()];
        let mut props: BTreeMap<String, PropertyType> = BTreeMap::new();
        while let Some(l) = stack.pop() {
            if !labels.insert(l.clone()) {
                continue;
            }
            let Some(et) = self.element(&l) else { continue };
            for p in &et.properties {
                props
                    .entry(p.key.clone())
                    .and_modify(|q| {
                        if q.data_type == p.data_type {
                            q.optional &= p.optional;
                        }
                    })
                    .or_insert_with(|| p.clone());
            }
            stack.extend(et.extends.iter().cloned());
        }
        Ok(Exposed { properties: props.into_values().collect(), labels })
    }

    pub fn exposed_labels(&self, label: &str) -> BTreeSet<String> {
        self.exposed(label).map(|e| e.labels).unwrap_or_default()
    }
}

impl PartialEq for GraphType {
    fn eq(&self, other: &Self) -> bool {
        self.normalized() == other.normalized()
    }
}

impl Eq for GraphType {}

/// `prop(b)`, `mand(b)` and `labels(b)` of one element type.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Exposed {
    pub properties: BTreeSet<PropertyType>,
    pub labels: BTreeSet<String>,
}

impl Exposed {
    pub fn mandatory(&self) -> BTreeSet<PropertyType> {
        self.properties.iter().filter(|p| !p.optional).cloned().collect()
    }

    pub fn keys(&self) -> BTreeSet<&str> {
        self.properties.iter().map(|p| p.key.as_str()).collect()
    }

    pub fn property(&self, key: &str) -> Option<&PropertyType> {
        self.properties.iter().find(|p| p.key == key)
    }
}

/// Convenience form of [`GraphType::exposed`] returning the three sets.
pub fn exposed_sets(
    gt: &GraphType,
    label: &str,
) -> Result<(BTreeSet<PropertyType>, BTreeSet<PropertyType>, BTreeSet<String>), DdlError> {
    let e = gt.exposed(label)?;
    let mand = e.mandatory();
    Ok((e.properties, mand, e.labels))
}
