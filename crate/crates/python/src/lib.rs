//! Python bindings. Graphs, maps and rules are opaque classes that convert
//! to and from the JSON formats of the core crate; reports come back as
//! plain Python values.

use std::collections::BTreeMap;

use pgse_core::ddl::{self, TypeIndex};
use pgse_core::graph::{ElementData, PropertyDictionary};
use pgse_core::iso::are_isomorphic;
use pgse_core::{
    check_homomorphism, compose, controlled_propagate_to_instance, controlled_propagate_to_schema, emit_clone_query,
    emit_merge_query, emit_rule_query, find_homomorphisms, find_matchings, AuditTrail, Homomorphism, ObjectId,
    PropagationRelation, PropertyGraph, Rule, SchemaManipulation, Selector, ValueMode,
};
use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;

create_exception!(pgse, PgseError, PyException, "Raised for any error reported by the engine.");

fn err(e: impl std::fmt::Display) -> PyErr {
    PgseError::new_err(e.to_string())
}

fn mode(name: &str) -> PyResult<ValueMode> {
    name.parse().map_err(err)
}

/// Converts a JSON value into Python objects through the `json` module.
fn to_py<'py>(py: Python<'py>, v: &impl serde::Serialize) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(v).map_err(err)?;
    py.import("json")?.call_method1("loads", (text,))
}

fn from_py<T: serde::de::DeserializeOwned>(obj: &Bound<'_, PyAny>) -> PyResult<T> {
    let text: String = obj.py().import("json")?.call_method1("dumps", (obj,))?.extract()?;
    serde_json::from_str(&text).map_err(err)
}

fn relation(obj: Option<&Bound<'_, PyAny>>) -> PyResult<PropagationRelation> {
    obj.map(from_py).transpose().map(Option::unwrap_or_default)
}

#[pyclass(name = "Graph", module = "pgse", skip_from_py_object)]
#[derive(Clone)]
struct PyGraph(PropertyGraph);

#[pymethods]
impl PyGraph {
    #[new]
    #[pyo3(signature = (simple = true))]
    fn new(simple: bool) -> Self {
        PyGraph(PropertyGraph::new(simple))
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        PropertyGraph::from_json(text).map(PyGraph).map_err(err)
    }

    fn to_json(&self) -> String {
        self.0.to_json()
    }

    #[getter]
    fn simple(&self) -> bool {
        self.0.is_simple()
    }

    fn node_count(&self) -> usize {
        self.0.node_count()
    }

    fn edge_count(&self) -> usize {
        self.0.edge_count()
    }

    fn nodes(&self) -> Vec<String> {
        self.0.node_ids().map(|n| n.to_string()).collect()
    }

    fn edges(&self) -> Vec<(String, String, String)> {
        self.0.edges().map(|(e, x)| (e.to_string(), x.source.to_string(), x.target.to_string())).collect()
    }

    /// Properties of a node or edge as `{key: [values]}`, plus its mandatory keys.
    fn element<'py>(&self, py: Python<'py>, id: &str) -> PyResult<Bound<'py, PyAny>> {
        let id = ObjectId::new(id);
        let data = self.0.node(&id).or_else(|| self.0.edge(&id).map(|e| &e.data));
        let data = data.ok_or_else(|| err(format!("unknown element `{id}`")))?;
        to_py(py, &serde_json::json!({"props": data.props, "mandatory": data.mandatory}))
    }

    /// `props` is `{key: [values]}` with values in the JSON value format.
    #[pyo3(signature = (id, props = None, mandatory = Vec::new()))]
    fn add_node(&mut self, id: &str, props: Option<&Bound<'_, PyAny>>, mandatory: Vec<String>) -> PyResult<String> {
        let props: PropertyDictionary = props.map(from_py).transpose()?.unwrap_or_default();
        let data = ElementData { props, mandatory: mandatory.into_iter().collect() };
        self.0.add_node(id, data).map(|n| n.to_string()).map_err(err)
    }

    #[pyo3(signature = (source, target, props = None))]
    fn add_edge(&mut self, source: &str, target: &str, props: Option<&Bound<'_, PyAny>>) -> PyResult<String> {
        let props: PropertyDictionary = props.map(from_py).transpose()?.unwrap_or_default();
        let (s, t) = (ObjectId::new(source), ObjectId::new(target));
        self.0.add_fresh_edge(&s, &t, ElementData::new(props)).map(|e| e.to_string()).map_err(err)
    }

    fn clone_node(&mut self, id: &str) -> PyResult<String> {
        self.0.clone_node(&ObjectId::new(id)).map(|n| n.to_string()).map_err(err)
    }

    /// Merges `b` into `a` and returns the surviving id.
    fn merge_nodes(&mut self, a: &str, b: &str) -> PyResult<String> {
        self.0.merge_nodes(&ObjectId::new(a), &ObjectId::new(b)).map(|n| n.to_string()).map_err(err)
    }

    fn is_isomorphic(&self, other: &PyGraph) -> bool {
        are_isomorphic(&self.0, &other.0)
    }

    fn copy(&self) -> Self {
        self.clone()
    }

    fn __eq__(&self, other: &PyGraph) -> bool {
        self.0 == other.0
    }

    fn __repr__(&self) -> String {
        format!("Graph(nodes={}, edges={})", self.0.node_count(), self.0.edge_count())
    }
}

/// A node map between two graphs.
#[pyclass(name = "Hom", module = "pgse", skip_from_py_object)]
#[derive(Clone)]
struct PyHom(Homomorphism);

#[pymethods]
impl PyHom {
    #[new]
    #[pyo3(signature = (pairs = BTreeMap::new()))]
    fn new(pairs: BTreeMap<String, String>) -> Self {
        PyHom(Homomorphism::from_pairs(pairs))
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Homomorphism::from_json(text).map(PyHom).map_err(err)
    }

    #[staticmethod]
    fn identity(g: &PyGraph) -> Self {
        PyHom(Homomorphism::identity(&g.0))
    }

    fn to_json(&self) -> String {
        self.0.to_json()
    }

    fn to_dict(&self) -> BTreeMap<String, String> {
        self.0.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect()
    }

    fn get(&self, node: &str) -> Option<String> {
        self.0.get(&ObjectId::new(node)).map(|n| n.to_string())
    }

    /// `self` followed by `then`.
    fn compose(&self, then: &PyHom) -> PyResult<Self> {
        compose(&self.0, &then.0).map(PyHom).map_err(err)
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    fn __eq__(&self, other: &PyHom) -> bool {
        self.0 == other.0
    }

    fn __repr__(&self) -> String {
        format!("Hom({})", self.0.to_json())
    }
}

#[pyclass(name = "Rule", module = "pgse", skip_from_py_object)]
#[derive(Clone)]
struct PyRule(Rule);

#[pymethods]
impl PyRule {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Rule::from_json(text).map(PyRule).map_err(err)
    }

    /// A rule from its three graphs and two maps `P -> L`, `P -> R`.
    #[new]
    fn new(lhs: &PyGraph, preserved: &PyGraph, rhs: &PyGraph, l_map: &PyHom, r_map: &PyHom) -> PyResult<Self> {
        Rule::new(lhs.0.clone(), preserved.0.clone(), rhs.0.clone(), l_map.0.clone(), r_map.0.clone())
            .map(PyRule)
            .map_err(err)
    }

    fn to_json(&self) -> String {
        self.0.to_json()
    }

    fn is_restrictive(&self) -> bool {
        self.0.is_restrictive()
    }

    fn is_expansive(&self) -> bool {
        self.0.is_expansive()
    }

    #[getter]
    fn lhs(&self) -> PyGraph {
        PyGraph(self.0.lhs.clone())
    }

    #[getter]
    fn rhs(&self) -> PyGraph {
        PyGraph(self.0.rhs.clone())
    }
}

/// The result of a rewrite: `G-` with `back_map: G- -> G`, then `G+` with
/// `fwd_map: G- -> G+`.
#[pyclass(name = "Application", module = "pgse", get_all)]
struct PyApplication {
    graph: Py<PyGraph>,
    restricted: Py<PyGraph>,
    back_map: Py<PyHom>,
    fwd_map: Py<PyHom>,
    restricted_matching: Py<PyHom>,
}

/// A repaired graph and its typing.
#[pyclass(name = "Propagated", module = "pgse", get_all)]
struct PyPropagated {
    graph: Py<PyGraph>,
    hom: Py<PyHom>,
}

#[pyclass(name = "GraphType", module = "pgse", skip_from_py_object)]
#[derive(Clone)]
struct PyGraphType(ddl::GraphType);

#[pymethods]
impl PyGraphType {
    #[getter]
    fn name(&self) -> String {
        self.0.name.clone()
    }

    fn counts(&self) -> (usize, usize, usize) {
        let gt = &self.0;
        (gt.element_types.len() + gt.implicit_edge_labels().len(), gt.node_types.len(), gt.edge_types.len())
    }

    /// The labels `label` inherits from.
    fn extends(&self, label: &str) -> PyResult<Vec<String>> {
        self.0.element(label).map(|e| e.extends.clone()).ok_or_else(|| err(format!("unknown label `{label}`")))
    }

    fn to_ddl(&self) -> String {
        ddl::print_ddl(&self.0)
    }

    fn to_json(&self) -> String {
        serde_json::to_string(&self.0).expect("graph type serializes")
    }

    /// The schema graph and its label index as JSON.
    #[pyo3(signature = (mode = "symbolic", force = false))]
    fn to_schema(&self, mode: &str, force: bool) -> PyResult<(PyGraph, String)> {
        let (s, index) = ddl::graph_type_to_schema_with(&self.0, self::mode(mode)?, force).map_err(err)?;
        Ok((PyGraph(s), index.to_json()))
    }
}

#[pyfunction]
fn parse_ddl(text: &str) -> PyResult<PyGraphType> {
    ddl::parse_ddl(text).map(PyGraphType).map_err(err)
}

/// Well-formedness diagnostics; empty when the DDL is valid.
#[pyfunction]
fn check_ddl<'py>(py: Python<'py>, text: &str) -> PyResult<Bound<'py, PyAny>> {
    let gt = ddl::parse_ddl_unchecked(text).map_err(err)?;
    to_py(py, &ddl::check_graph_type(&gt))
}

/// Reads a schema back as DDL, using a trail for inheritance when given.
#[pyfunction]
#[pyo3(signature = (schema, index, trail = None))]
fn schema_to_ddl(schema: &PyGraph, index: &str, trail: Option<&str>) -> PyResult<String> {
    let index = TypeIndex::from_json(index).map_err(err)?;
    let trail = trail.map(AuditTrail::from_json).transpose().map_err(err)?;
    let gt = ddl::schema_to_graph_type(&schema.0, &index, trail.as_ref()).map_err(err)?;
    Ok(ddl::print_ddl(&gt))
}

/// The violations of `hom` as a typing of `instance` by `schema`.
#[pyfunction]
#[pyo3(signature = (instance, schema, hom, mode = "symbolic"))]
fn validate<'py>(
    py: Python<'py>,
    instance: &PyGraph,
    schema: &PyGraph,
    hom: &PyHom,
    mode: &str,
) -> PyResult<Bound<'py, PyAny>> {
    let report = check_homomorphism(&instance.0, &schema.0, &hom.0, self::mode(mode)?).map_err(err)?;
    to_py(py, &report.violations)
}

#[pyfunction(name = "find_homomorphisms")]
#[pyo3(signature = (g, s, mode = "symbolic", limit = None))]
fn find_homs(g: &PyGraph, s: &PyGraph, mode: &str, limit: Option<usize>) -> PyResult<Vec<PyHom>> {
    Ok(find_homomorphisms(&g.0, &s.0, self::mode(mode)?, limit).into_iter().map(PyHom).collect())
}

#[pyfunction(name = "find_matchings")]
fn matchings(rule: &PyRule, g: &PyGraph) -> Vec<PyHom> {
    find_matchings(&rule.0, &g.0).into_iter().map(PyHom).collect()
}

#[pyfunction]
fn apply_rule(py: Python<'_>, g: &PyGraph, rule: &PyRule, matching: &PyHom) -> PyResult<PyApplication> {
    let app = pgse_core::apply_rule(&g.0, &rule.0, &matching.0).map_err(err)?;
    Ok(PyApplication {
        graph: Py::new(py, PyGraph(app.expanded.graph))?,
        restricted: Py::new(py, PyGraph(app.restricted.graph))?,
        back_map: Py::new(py, PyHom(app.restricted.back_map))?,
        fwd_map: Py::new(py, PyHom(app.expanded.fwd_map))?,
        restricted_matching: Py::new(py, PyHom(app.restricted.matching))?,
    })
}

fn propagated(py: Python<'_>, graph: PropertyGraph, hom: Homomorphism) -> PyResult<PyPropagated> {
    Ok(PyPropagated { graph: Py::new(py, PyGraph(graph))?, hom: Py::new(py, PyHom(hom))? })
}

/// Repairs `g` after its schema was restricted to `s_minus`.
#[pyfunction]
#[pyo3(signature = (g, hom, s_minus, back_map, mode = "symbolic", relation = None))]
fn propagate_to_instance(
    py: Python<'_>,
    g: &PyGraph,
    hom: &PyHom,
    s_minus: &PyGraph,
    back_map: &PyHom,
    mode: &str,
    relation: Option<&Bound<'_, PyAny>>,
) -> PyResult<PyPropagated> {
    let rel = self::relation(relation)?;
    let p = controlled_propagate_to_instance(&g.0, &hom.0, &s_minus.0, &back_map.0, self::mode(mode)?, &rel)
        .map_err(err)?;
    propagated(py, p.graph, p.hom)
}

/// Repairs schema `s` after its instance was expanded to `g_plus`.
#[pyfunction]
#[pyo3(signature = (s, g_plus, hom, fwd_map, mode = "symbolic", relation = None))]
fn propagate_to_schema(
    py: Python<'_>,
    s: &PyGraph,
    g_plus: &PyGraph,
    hom: &PyHom,
    fwd_map: &PyHom,
    mode: &str,
    relation: Option<&Bound<'_, PyAny>>,
) -> PyResult<PyPropagated> {
    let rel = self::relation(relation)?;
    let p = controlled_propagate_to_schema(&s.0, &g_plus.0, &hom.0, &fwd_map.0, self::mode(mode)?, &rel).map_err(err)?;
    propagated(py, p.graph, p.hom)
}

/// An instance, its schema, the typing and the schema's audit trail.
#[pyclass(name = "Hierarchy", module = "pgse", skip_from_py_object)]
struct PyHierarchy(pgse_core::Hierarchy);

#[pymethods]
impl PyHierarchy {
    /// `index` is the label index as JSON; `ddl` is the origin's DDL text.
    #[new]
    #[pyo3(signature = (instance, schema, hom, index, mode = "symbolic", ddl = None))]
    fn new(
        instance: &PyGraph,
        schema: &PyGraph,
        hom: &PyHom,
        index: &str,
        mode: &str,
        ddl: Option<&str>,
    ) -> PyResult<Self> {
        let index = TypeIndex::from_json(index).map_err(err)?;
        let origin = ddl.map(ddl::parse_ddl).transpose().map_err(err)?;
        pgse_core::Hierarchy::new(instance.0.clone(), schema.0.clone(), hom.0.clone(), index, self::mode(mode)?, origin)
            .map(PyHierarchy)
            .map_err(err)
    }

    /// Applies a manipulation given as a dict or a JSON string.
    fn apply(&mut self, smo: &Bound<'_, PyAny>) -> PyResult<()> {
        let smo = match smo.extract::<String>() {
            Ok(text) => SchemaManipulation::from_json(&text).map_err(err)?,
            Err(_) => from_py(smo)?,
        };
        self.0.apply(&smo).map_err(err)
    }

    #[pyo3(signature = (rule, matching, relation = None))]
    fn rewrite_schema(&mut self, rule: &PyRule, matching: &PyHom, relation: Option<&Bound<'_, PyAny>>) -> PyResult<()> {
        let rel = relation.map(from_py::<PropagationRelation>).transpose()?;
        self.0.rewrite_schema(&rule.0, &matching.0, rel.as_ref()).map_err(err)
    }

    #[pyo3(signature = (rule, matching, relation = None))]
    fn rewrite_instance(
        &mut self,
        rule: &PyRule,
        matching: &PyHom,
        relation: Option<&Bound<'_, PyAny>>,
    ) -> PyResult<()> {
        let rel = relation.map(from_py::<PropagationRelation>).transpose()?;
        self.0.rewrite_instance(&rule.0, &matching.0, rel.as_ref()).map_err(err)
    }

    fn validate<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &self.0.validate().map_err(err)?.violations)
    }

    #[getter]
    fn instance(&self) -> PyGraph {
        PyGraph(self.0.instance.clone())
    }

    #[getter]
    fn schema(&self) -> PyGraph {
        PyGraph(self.0.schema.clone())
    }

    #[getter]
    fn hom(&self) -> PyHom {
        PyHom(self.0.hom.clone())
    }

    /// Label to schema node.
    #[getter]
    fn labels(&self) -> BTreeMap<String, String> {
        self.0.index.nodes.iter().map(|(l, n)| (l.clone(), n.to_string())).collect()
    }

    fn index_json(&self) -> String {
        self.0.index.to_json()
    }

    fn trail_json(&self) -> String {
        self.0.trail.to_json()
    }

    fn replay(&self) -> PyResult<PyGraph> {
        self.0.trail.replay().map(PyGraph).map_err(err)
    }

    fn graph_type(&self) -> PyResult<PyGraphType> {
        self.0.graph_type().map(PyGraphType).map_err(err)
    }
}

#[pyfunction]
fn emit_clone(id: &str) -> String {
    emit_clone_query(&Selector::id(id)).text
}

#[pyfunction]
#[pyo3(signature = (a, b, simple = true))]
fn emit_merge(a: &str, b: &str, simple: bool) -> String {
    emit_merge_query(&Selector::id(a), &Selector::id(b), simple).text
}

/// A query for `rule`; every `L` node is selected by the id of its image.
#[pyfunction]
fn emit_rule(rule: &PyRule, matching: &PyHom) -> PyResult<String> {
    let selectors: BTreeMap<ObjectId, Selector> =
        matching.0.iter().map(|(x, n)| (x.clone(), Selector::id(n.as_str()))).collect();
    emit_rule_query(&rule.0, &selectors).map(|q| q.text).map_err(err)
}

#[pymodule]
fn pgse(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("PgseError", m.py().get_type::<PgseError>())?;
    m.add_class::<PyGraph>()?;
    m.add_class::<PyHom>()?;
    m.add_class::<PyRule>()?;
    m.add_class::<PyApplication>()?;
    m.add_class::<PyPropagated>()?;
    m.add_class::<PyGraphType>()?;
    m.add_class::<PyHierarchy>()?;
    m.add_function(wrap_pyfunction!(parse_ddl, m)?)?;
    m.add_function(wrap_pyfunction!(check_ddl, m)?)?;
    m.add_function(wrap_pyfunction!(schema_to_ddl, m)?)?;
    m.add_function(wrap_pyfunction!(validate, m)?)?;
    m.add_function(wrap_pyfunction!(find_homs, m)?)?;
    m.add_function(wrap_pyfunction!(matchings, m)?)?;
    m.add_function(wrap_pyfunction!(apply_rule, m)?)?;
    m.add_function(wrap_pyfunction!(propagate_to_instance, m)?)?;
    m.add_function(wrap_pyfunction!(propagate_to_schema, m)?)?;
    m.add_function(wrap_pyfunction!(emit_clone, m)?)?;
    m.add_function(wrap_pyfunction!(emit_merge, m)?)?;
    m.add_function(wrap_pyfunction!(emit_rule, m)?)?;
    Ok(())
}
