//! Cypher-flavoured update queries for clone, merge and rule application.
//!
//! Cypher cannot use a key held in a variable, so property unions go through
//! `apoc.map.setKey`.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;

use crate::error::RewriteError;
use crate::graph::{ElementData, ObjectId};
use crate::rewrite::{derive_actions, EditAction, ElementRef, Rule};
use crate::value::Value;

/// A named clause of an emitted query.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Section {
    pub name: String,
    pub text: String,
}

/// Query text split into named sections; `text` is their concatenation.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct QueryText {
    pub text: String,
    pub sections: Vec<Section>,
}

impl QueryText {
    fn push(&mut self, name: &str, text: impl Into<String>) {
        let text = text.into();
        self.text.push_str(&text);
        self.sections.push(Section { name: name.to_owned(), text });
    }

    fn extend(&mut self, other: QueryText) {
        for s in other.sections {
            self.push(&s.name, s.text);
        }
    }

    pub fn names(&self) -> Vec<&str> {
        self.sections.iter().map(|s| s.name.as_str()).collect()
    }

    pub fn count(&self, name: &str) -> usize {
        self.sections.iter().filter(|s| s.name == name).count()
    }

    pub fn section(&self, name: &str) -> Option<&Section> {
        self.sections.iter().find(|s| s.name == name)
    }

    /// The section map as JSON: a list of `{name, text}` objects.
    pub fn sections_json(&self) -> serde_json::Value {
        serde_json::to_value(&self.sections).expect("sections serialize")
    }
}

/// A key/value pair identifying one node, rendered as `{ key : value }`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Selector {
    pub key: String,
    pub value: Value,
}

impl Selector {
    pub fn new(key: impl Into<String>, value: Value) -> Self {
        Selector { key: key.into(), value }
    }

    /// `id = '<value>'`.
    pub fn id(value: &str) -> Self {
        Selector::new("id", Value::str(value))
    }

    fn render(&self) -> String {
        format!("{{ {} : {} }}", key(&self.key), literal(&self.value))
    }
}

fn key(k: &str) -> String {
    let mut chars = k.chars();
    let plain = chars.next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_');
    if plain {
        k.to_owned()
    } else {
        format!("`{}`", k.replace('`', "``"))
    }
}

fn literal(v: &Value) -> String {
    match v {
        Value::Int(i) => i.to_string(),
        Value::Bool(b) => b.to_string(),
        Value::Str(s) => format!("'{}'", s.replace('\\', "\\\\").replace('\'', "\\'")),
        Value::Date(d) => format!("date('{}')", d.format("%Y-%m-%d")),
    }
}

fn list<'a>(vals: impl IntoIterator<Item = &'a Value>) -> String {
    let items: Vec<String> = vals.into_iter().map(literal).collect();
    format!("[{}]", items.join(", "))
}

fn map_literal(data: &ElementData, extra: Option<(&str, &Value)>) -> String {
    let mut items = Vec::new();
    if let Some((k, v)) = extra {
        items.push(format!("{} : {}", key(k), literal(v)));
    }
    for (k, vals) in data.props.iter() {
        items.push(format!("{} : {}", key(k), list(vals)));
    }
    format!("{{ {} }}", items.join(", "))
}

const CLONE: &[(&str, &str)] = &[
    (
        "match",
        r#"// Query performing clone of a node
MATCH (a {sel_a})
"#,
    ),
    (
        "create-clone",
        r#"// create a node corresponding to the clone
CREATE (a1)
WITH a, a1
SET a1 = a
WITH a, a1
"#,
    ),
    (
        "collect-successors",
        r#"// match successors and out-edges
OPTIONAL MATCH (a)-[out_edge:edge]->(suc)
WITH a, a1, filter(
    el IN collect(
        {neighbor: suc, edge: out_edge})
    WHERE NOT el.neighbor IS NULL) as suc_maps
"#,
    ),
    (
        "collect-predecessors",
        r#"// match predecessors and in-edges
OPTIONAL MATCH (pred)-[in_edge:edge]->(a)
WITH a, a1, suc_maps, filter(
    el IN collect(
        {neighbor: pred, edge: in_edge})
    WHERE NOT el.neighbor IS NULL) as pred_maps
"#,
    ),
    (
        "copy-out-edges",
        r#"// copy all incident edges of the original node
FOREACH (suc_map IN suc_maps |
    FOREACH(suc IN [suc_map.neighbor] |
        CREATE (a1)-[new_edge:edge]->(suc)
        SET new_edge = suc_map.edge))
"#,
    ),
    (
        "copy-in-edges",
        r#"FOREACH (pred_map IN pred_maps |
    FOREACH(pred in [pred_map.neighbor] |
        CREATE (pred)-[new_edge:edge]->(a1)
        SET new_edge = pred_map.edge))
"#,
    ),
    (
        "copy-self-loops",
        r#"// copy self loop
FOREACH (suc_map IN suc_maps |
    FOREACH (self_loop IN
        CASE WHEN suc_map.neighbor=a
        THEN [suc_map.edge] ELSE [] END |
            CREATE (a1)-[new_edge:edge]->(a1)
            SET new_edge = self_loop))
"#,
    ),
    (
        "return",
        r#"WITH a, a1
RETURN a1
"#,
    ),
];

const MERGE_SIMPLE: &[(&str, &str)] = &[
    (
        "match",
        r#"// As the following is not allowed by Cypher
// `SET a[key] = b[key]`, so we use APOC instead:
// `SET a = apoc.map.setKey(a, key, b[key])`
MATCH {match_ab}
"#,
    ),
    (
        "merge-props",
        r#"// Add properties of 'b' to 'a'
FOREACH(key in keys(b) |
    FOREACH(dummy IN
        CASE WHEN key IN keys(a)
        THEN [] ELSE [NULL] END |
            // SET a[key] = b[key]
            SET a = apoc.map.setKey(
                a, key, b[key]))
    FOREACH(dummy IN
        CASE WHEN key IN keys(a)
        THEN [NULL] ELSE [] END |
            SET a = apoc.map.setKey(
                a, key, a[key] + filter(
                    el IN b[key] WHERE NOT el in a[key]))))
"#,
    ),
    (
        "collect-successors",
        r#"// list with ids of merged nodes to track self loops
WITH a as merged_node, b,
    [id(a), id(b)] as merged_nodes

// match successors of 'b'
OPTIONAL MATCH (b)-[out_edge:edge]->(suc)
WITH merged_node, b, merged_nodes, filter(
    el IN collect({neighbor: suc, edge: out_edge})
    WHERE NOT el.neighbor IS NULL) AS all_suc_maps
WITH merged_node, b, merged_nodes,
    filter(
        el in all_suc_maps
        WHERE NOT id(el.neighbor) IN merged_nodes)
            AS new_suc_maps,
    filter(
        el in all_suc_maps
        WHERE id(el.neighbor) IN merged_nodes)
            AS loop_suc_maps
"#,
    ),
    (
        "collect-predecessors",
        r#"//  match predecessors of 'b'
OPTIONAL MATCH (pred)-[in_edge:edge]->(b)
WITH merged_node, b, merged_nodes, new_suc_maps,
    loop_suc_maps, filter(
    el IN collect({neighbor: pred, edge: in_edge})
    WHERE NOT el.neighbor IS NULL) AS all_pred_maps
WITH merged_node, b, merged_nodes, new_suc_maps,
    loop_suc_maps, filter(
        el IN all_pred_maps
        WHERE NOT id(el.neighbor) IN merged_nodes)
            AS new_pred_maps,
    filter(
        el IN all_pred_maps
        WHERE id(el.neighbor) IN merged_nodes)
            AS loop_pred_maps
"#,
    ),
    (
        "merge-out-edges",
        r#"// create edges for sucs/preds that
// didn't exist before and/or merge
// their attributes into existing edges
FOREACH (suc_map IN new_suc_maps |
    FOREACH(suc IN [suc_map.neighbor] |
        MERGE (merged_node)-[edge:edge]->(suc)
        // Merge dicts
        FOREACH(key in keys(suc_map.edge) |
            FOREACH(dummy IN
                CASE WHEN key IN keys(edge)
                THEN [] ELSE [NULL] END |
                // SET edge[key] = suc_map.edge[key]
                SET edge = apoc.map.setKey(
                    edge, key, suc_map.edge[key])
            )
            FOREACH(dummy IN
                CASE WHEN key IN keys(edge)
                THEN [NULL] ELSE [] END |
                    SET edge = apoc.map.setKey(
                        edge, key, edge[key] + filter(
                            el IN suc_map.edge[key]
                            WHERE NOT el in edge[key]))))))
"#,
    ),
    (
        "merge-in-edges",
        r#"FOREACH (pred_map IN new_pred_maps |
    FOREACH(pred in [pred_map.neighbor] |
        MERGE (pred)-[edge:edge]->(merged_node)
        FOREACH(key in keys(pred_map.edge) |
            FOREACH(dummy IN
                CASE WHEN key IN keys(edge)
                THEN []
                ELSE [NULL] END |
                    SET edge = apoc.map.setKey(
                        edge, key, pred_map.edge[key])
            )
            FOREACH(dummy IN
                CASE WHEN key IN keys(edge)
                THEN [NULL] ELSE [] END |
                SET edge = apoc.map.setKey(
                    edge, key, edge[key] + filter(
                        el IN pred_map.edge[key]
                        WHERE NOT el in edge[key]))))))
"#,
    ),
    (
        "handle-loops",
        r#"// handle self loops
WITH merged_node, b, loop_suc_maps, loop_pred_maps
OPTIONAL MATCH (merged_node)-[old_loop:edge]->(merged_node)
FOREACH(dummy IN
    CASE WHEN NOT old_loop IS NULL OR
        length(loop_suc_maps) > 0 OR
        length(loop_pred_maps) > 0
    THEN [NULL] ELSE [] END |
    MERGE (merged_node)-[
            old_loop:edge]->(merged_node)
    FOREACH (map IN loop_suc_maps + loop_pred_maps |
        FOREACH(key in keys(map.edge) |
            FOREACH(dummy IN
                CASE WHEN key IN keys(old_loop)
                THEN [] ELSE [NULL] END |
                SET old_loop = apoc.map.setKey(
                    old_loop, key, map.edge[key])
            )
            FOREACH(dummy IN
                CASE WHEN key IN keys(old_loop)
                THEN [NULL] ELSE [] END |
                SET old_loop = apoc.map.setKey(
                    old_loop, key, old_loop[key] + filter(
                        el IN map.edge[key]
                        WHERE NOT el in old_loop[key]))))))
"#,
    ),
    (
        "delete",
        r#"DETACH DELETE b
"#,
    ),
    (
        "return",
        r#"RETURN merged_node
"#,
    ),
];

const MERGE_NON_SIMPLE: &[(&str, &str)] = &[
    (
        "collect-successors",
        r#"// list with ids of merged nodes to track self loops
WITH a as merged_node, b

// match successors of 'b'
OPTIONAL MATCH (b)-[out_edge:edge]->(suc)
WITH merged_node, b, filter(
    el IN collect({neighbor: suc, edge: out_edge})
    WHERE NOT el.neighbor IS NULL) AS suc_maps
"#,
    ),
    (
        "collect-predecessors",
        r#"//  match predecessors of 'b'
OPTIONAL MATCH (pred)-[in_edge:edge]->(b)
WITH merged_node, b, suc_maps, filter(
    el IN collect({neighbor: pred, edge: in_edge})
    WHERE NOT el.neighbor IS NULL AND el.neighbor <> b) AS pred_maps
"#,
    ),
    (
        "retarget-out-edges",
        r#"// re-attach the edges of 'b' to the merged node
FOREACH (suc_map IN suc_maps |
    FOREACH(suc IN [CASE WHEN suc_map.neighbor = b
            THEN merged_node ELSE suc_map.neighbor END] |
        CREATE (merged_node)-[new_edge:edge]->(suc)
        SET new_edge = suc_map.edge))
"#,
    ),
    (
        "retarget-in-edges",
        r#"FOREACH (pred_map IN pred_maps |
    FOREACH(pred in [pred_map.neighbor] |
        CREATE (pred)-[new_edge:edge]->(merged_node)
        SET new_edge = pred_map.edge))
"#,
    ),
];

/// Clones the node matched by `selector`, copying its properties and every
/// incident edge; a self-loop yields loops on both copies and edges between
/// them.
pub fn emit_clone_query(selector: &Selector) -> QueryText {
    let mut q = QueryText::default();
    for (name, text) in CLONE {
        q.push(name, text.replace("{sel_a}", &selector.render()));
    }
    q
}

/// Merges the node matched by `b` into the node matched by `a`.
///
/// In simple graphs, edges towards a shared neighbour are unified and edges
/// among the two nodes consolidate into one self-loop; otherwise every edge
/// of `b` is re-attached as is.
pub fn emit_merge_query(a: &Selector, b: &Selector, simple: bool) -> QueryText {
    merge_template(&format!("(a {}), (b {})", a.render(), b.render()), simple)
}

fn merge_template(match_ab: &str, simple: bool) -> QueryText {
    let mut q = QueryText::default();
    for (name, text) in MERGE_SIMPLE {
        let text = text.replace("{match_ab}", match_ab);
        match *name {
            "collect-successors" if !simple => {
                for (n, t) in MERGE_NON_SIMPLE {
                    q.push(n, *t);
                }
            }
            "collect-predecessors" | "merge-out-edges" | "merge-in-edges" | "handle-loops" if !simple => {}
            _ => q.push(name, text),
        }
    }
    q
}

/// How to find the image of every rule node in a host.
struct Binder<'a> {
    key: String,
    selectors: &'a BTreeMap<ObjectId, Selector>,
    rule: &'a Rule,
}

impl Binder<'_> {
    /// `P` nodes other than the first of their fibre are clones, found by
    /// their own id once the clone query has set it.
    fn preserved(&self, p: &ObjectId) -> Selector {
        let x = &self.rule.l_map.node_map[p];
        let fibre = self.rule.l_map.preimage(x);
        if fibre.first() == Some(p) {
            self.selectors[x].clone()
        } else {
            Selector::new(self.key.clone(), Value::str(p.as_str()))
        }
    }

    fn result(&self, r: &ObjectId) -> Selector {
        match self.rule.r_map.preimage(r).first() {
            Some(p) => self.preserved(p),
            None => Selector::new(self.key.clone(), Value::str(r.as_str())),
        }
    }
}

fn edit_text(var: &str, k: &str, action: &EditAction) -> Option<String> {
    let prop = format!("{var}.{}", key(k));
    Some(match action {
        EditAction::RemoveKey => format!("REMOVE {prop}"),
        EditAction::RemoveValues(vals) => {
            format!("SET {prop} = filter(el IN {prop} WHERE NOT el IN {})", list(vals))
        }
        EditAction::AddValues(vals) => format!(
            "SET {prop} = coalesce({prop}, []) + filter(el IN {} WHERE NOT el IN coalesce({prop}, []))",
            list(vals)
        ),
        // mandatory marks have no Cypher counterpart
        EditAction::Unmark | EditAction::Mark => return None,
    })
}

fn element_match(element: &ElementRef, sel: impl Fn(&ObjectId) -> Selector) -> (String, &'static str) {
    match element {
        ElementRef::Node(n) => (format!("MATCH (x {})", sel(n).render()), "x"),
        ElementRef::Edge(s, t) => (format!("MATCH (s {})-[e:edge]->(t {})", sel(s).render(), sel(t).render()), "e"),
    }
}

/// A query applying `rule` where each `L` node is found by its selector: a
/// match binding `L` injectively, then one statement per elementary step.
pub fn emit_rule_query(rule: &Rule, selectors: &BTreeMap<ObjectId, Selector>) -> Result<QueryText, RewriteError> {
    let rule = Rule::new(
        rule.lhs.clone(),
        rule.preserved.clone(),
        rule.rhs.clone(),
        rule.l_map.clone(),
        rule.r_map.clone(),
    )?;
    for x in rule.lhs.node_ids() {
        if !selectors.contains_key(x) {
            return Err(RewriteError::InvalidMatching(format!("no selector for `{x}`")));
        }
    }
    let binder = Binder {
        key: selectors.values().next().map(|s| s.key.clone()).unwrap_or_else(|| "id".into()),
        selectors,
        rule: &rule,
    };
    let plan = derive_actions(&rule);
    let mut q = QueryText::default();

    let vars: BTreeMap<&ObjectId, String> =
        rule.lhs.node_ids().enumerate().map(|(i, x)| (x, format!("x{i}"))).collect();
    let mut patterns: Vec<String> = vars.iter().map(|(x, v)| format!("({v} {})", selectors[*x].render())).collect();
    for (i, (_, e)) in rule.lhs.edges().enumerate() {
        patterns.push(format!("({})-[r{i}:edge]->({})", vars[&e.source], vars[&e.target]));
    }
    let mut text = String::new();
    if patterns.is_empty() {
        text.push_str("RETURN true;\n");
    } else {
        writeln!(text, "MATCH {}", patterns.join(",\n      ")).unwrap();
        let names: Vec<&String> = vars.values().collect();
        let distinct: Vec<String> = names
            .iter()
            .enumerate()
            .flat_map(|(i, a)| names[i + 1..].iter().map(move |b| format!("id({a}) <> id({b})")))
            .collect();
        if !distinct.is_empty() {
            writeln!(text, "WHERE {}", distinct.join(" AND ")).unwrap();
        }
        let all: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
        writeln!(text, "RETURN {};", all.join(", ")).unwrap();
    }
    q.push("match", text);

    for x in &plan.node_deletes {
        q.push("delete-node", format!("MATCH (x {})\nDETACH DELETE x;\n", selectors[x].render()));
    }
    for (x, k) in &plan.clones {
        let fibre = rule.l_map.preimage(x);
        for p in fibre.iter().skip(1).take(*k) {
            let mut t = emit_clone_query(&selectors[x]);
            let ret = t.sections.pop().expect("return section");
            t.text.truncate(t.text.len() - ret.text.len());
            t.push("set-clone-id", format!("SET a1.{} = {}\n", key(&binder.key), literal(&Value::str(p.as_str()))));
            t.push("return", format!("{};\n", ret.text.trim_end()));
            q.extend(t);
        }
    }
    for d in &plan.edge_deletes {
        q.push(
            "delete-edge",
            format!(
                "MATCH (s {})-[e:edge]->(t {})\nWITH e LIMIT 1\nDELETE e;\n",
                binder.preserved(&d.source).render(),
                binder.preserved(&d.target).render()
            ),
        );
    }
    for edit in &plan.property_deletes {
        let (m, var) = element_match(&edit.element, |p| binder.preserved(p));
        if let Some(set) = edit_text(var, &edit.key, &edit.action) {
            q.push("delete-props", format!("{m}\n{set};\n"));
        }
    }
    for group in &plan.merges {
        let a = binder.preserved(&group[0]);
        let others: Vec<Selector> = group[1..].iter().map(|p| binder.preserved(p)).collect();
        let match_ab = if others.len() == 1 {
            format!("(a {}), (b {})", a.render(), others[0].render())
        } else {
            let vals: Vec<&Value> = others.iter().map(|s| &s.value).collect();
            format!("(a {}), (b) WHERE b.{} IN {}", a.render(), key(&others[0].key), list(vals))
        };
        let mut t = merge_template(&match_ab, rule.lhs.is_simple());
        let ret = t.sections.pop().expect("return section");
        t.text.truncate(t.text.len() - ret.text.len());
        t.push("return", format!("{};\n", ret.text.trim_end()));
        q.extend(t);
    }
    for n in &plan.node_adds {
        let data = rule.rhs.node(n).expect("rhs node");
        let id = Value::str(n.as_str());
        q.push("create-node", format!("CREATE (n {});\n", map_literal(data, Some((&binder.key, &id)))));
    }
    for e in &plan.edge_adds {
        let edge = rule.rhs.edge(e).expect("rhs edge");
        let verb = if rule.rhs.is_simple() { "MERGE" } else { "CREATE" };
        let mut text = format!(
            "MATCH (s {}), (t {})\n{verb} (s)-[e:edge]->(t)\n",
            binder.result(&edge.source).render(),
            binder.result(&edge.target).render()
        );
        if !edge.data.props.is_empty() {
            writeln!(text, "SET e += {}", map_literal(&edge.data, None)).unwrap();
        }
        text.push_str("RETURN e;\n");
        q.push("create-edge", text);
    }
    for edit in &plan.property_adds {
        let (m, var) = element_match(&edit.element, |r| binder.result(r));
        if let Some(set) = edit_text(var, &edit.key, &edit.action) {
            q.push("add-props", format!("{m}\n{set};\n"));
        }
    }
    Ok(q)
}
