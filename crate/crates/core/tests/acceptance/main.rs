//! End-to-end acceptance checks. Each criterion prints one PASS/FAIL line;
//! the process fails if any criterion fails.

#[path = "../common/mod.rs"]
mod common;
mod gen;
mod props;

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};

use common::stub::{run_clone, run_merge, test_graphs};
use common::{golden_graph, graph, hom, rule};
use pgse_core::codegen::{emit_clone_query, emit_merge_query, QueryText, Selector};
use pgse_core::ddl::{check_graph_type, graph_type_to_schema, parse_ddl};
use pgse_core::graph::{ObjectId, PropertyGraph};
use pgse_core::hom::{check_homomorphism, Condition, Homomorphism, ValidationReport, ValueMode};
use pgse_core::iso::are_isomorphic;
use pgse_core::propagation::{
    controlled_propagate_to_instance, propagate_to_instance, propagate_to_schema, PropagationRelation,
};
use pgse_core::rewrite::{apply_restrictive, apply_rule};
use pgse_core::smo::{Direction, Hierarchy, PropertySpec, SchemaManipulation, SmoOp};
use pgse_core::Value;

fn id(s: &str) -> ObjectId {
    ObjectId::new(s)
}

fn valid(g: &PropertyGraph, s: &PropertyGraph, h: &Homomorphism, mode: ValueMode) {
    let r = check_homomorphism(g, s, h, mode).unwrap();
    assert!(r.is_empty(), "{:?}", r.violations);
}

fn c1_full_ddl() {
    let gt = parse_ddl(&common::fixture("snb.ddl")).unwrap();
    assert!(check_graph_type(&gt).is_empty());
    assert_eq!(
        (gt.element_types.len(), gt.node_types.len(), gt.edge_types.len()),
        (29, 11, 20)
    );
}

fn c2_excerpt_schema() {
    let gt = parse_ddl(&common::fixture("snb_excerpt.ddl")).unwrap();
    let (s, index) = graph_type_to_schema(&gt, ValueMode::Symbolic).unwrap();
    assert_eq!((s.node_count(), s.edge_count()), (3, 7));
    assert!(are_isomorphic(&s, &golden_graph("excerpt_schema.json")));
    let mut edges: Vec<(String, String, String)> = s
        .edges()
        .map(|(e, edge)| {
            let label = |n: &ObjectId| index.label_of(n).unwrap().to_owned();
            (index.edge_label(e).unwrap().to_owned(), label(&edge.source), label(&edge.target))
        })
        .collect();
    edges.sort();
    let expected = [
        ("HAS_CREATOR", "Comment", "Person"),
        ("HAS_CREATOR", "Post", "Person"),
        ("KNOWS", "Person", "Person"),
        ("LIKES", "Person", "Comment"),
        ("LIKES", "Person", "Post"),
        ("REPLY_OF", "Comment", "Comment"),
        ("REPLY_OF", "Comment", "Post"),
    ];
    let expected: Vec<(String, String, String)> =
        expected.iter().map(|(l, a, b)| (l.to_string(), a.to_string(), b.to_string())).collect();
    assert_eq!(edges, expected);
}

fn c3_validation() {
    let s = golden_graph("excerpt_schema.json");
    let h = hom("fixtures/social_hom.json");
    let check = |g: &str, s: &PropertyGraph, mode| -> ValidationReport {
        check_homomorphism(&graph(&format!("fixtures/{g}")), s, &h, mode).unwrap()
    };
    let g = graph("fixtures/social_instance.json");
    assert_eq!((g.node_count(), g.edge_count()), (7, 11));
    assert!(check("social_instance.json", &s, ValueMode::Symbolic).valid);
    let kinds = |r: &ValidationReport| r.violations.iter().map(|v| v.condition).collect::<BTreeSet<_>>();
    let ext = graph("fixtures/excerpt_schema_extensional.json");
    for (g, s, mode, kind) in [
        ("social_extra_reply.json", &s, ValueMode::Symbolic, Condition::Structure),
        ("social_no_lastname.json", &s, ValueMode::Symbolic, Condition::Mandatory),
        ("social_foreign_value.json", &ext, ValueMode::Extensional, Condition::Values),
    ] {
        let r = check(g, s, mode);
        assert_eq!(kinds(&r), [kind].into(), "{g}: {:?}", r.violations);
    }
}

fn c4_merge_and_add() {
    let g = graph("fixtures/social_instance.json");
    let out = apply_rule(&g, &rule("fixtures/merge_posts_rule.json"), &hom("fixtures/merge_posts_matching.json")).unwrap();
    assert!(are_isomorphic(out.graph(), &golden_graph("merge_posts_result.json")));
    let merged = out.expanded.fwd_map.get(&id("n4")).unwrap();
    let dates: BTreeSet<Value> = ["2010-10-16", "2010-10-30"].iter().map(|d| Value::date(d).unwrap()).collect();
    assert_eq!(out.graph().node(merged).unwrap().props.values("creationDate"), Some(&dates));
    let kept: BTreeSet<&ObjectId> = out.expanded.fwd_map.iter().map(|(_, n)| n).collect();
    let added: Vec<&ObjectId> = out.graph().node_ids().filter(|n| !kept.contains(n)).collect();
    assert_eq!(added.len(), 1);
    let incident = out.graph().out_edges(added[0]).len() + out.graph().in_edges(added[0]).len();
    assert_eq!(incident, 2);
}

fn c5_merge_to_schema() {
    let g = graph("fixtures/social_instance.json");
    let gt = parse_ddl(&common::fixture("snb_excerpt.ddl")).unwrap();
    let (s, _) = graph_type_to_schema(&gt, ValueMode::Symbolic).unwrap();
    let out = apply_rule(&g, &rule("fixtures/merge_reply_rule.json"), &hom("fixtures/merge_reply_matching.json")).unwrap();
    let p = propagate_to_schema(&s, out.graph(), &hom("fixtures/social_hom.json"), &out.expanded.fwd_map, ValueMode::Symbolic)
        .unwrap();
    assert_eq!((p.graph.node_count(), p.graph.edge_count()), (2, 4));
    assert!(are_isomorphic(&p.graph, &golden_graph("merged_schema.json")));
    assert!(p.graph.nodes().any(|(_, d)| d.props.contains_key("imageFile") && d.props.contains_key("browserUsed")));
    valid(out.graph(), &p.graph, &p.hom, ValueMode::Symbolic);
}

fn c6_controlled_clone() {
    let s = graph("fixtures/typed_message_schema.json");
    let split = apply_restrictive(&s, &rule("fixtures/message_split_rule.json"), &hom("fixtures/message_split_matching.json"))
        .unwrap();
    let g = graph("fixtures/message_instance.json");
    let h = hom("fixtures/message_hom.json");
    let mut rel = PropagationRelation::from_json(&common::fixture("message_split_relation.json")).unwrap();
    rel.keep = rel.keep.into_iter().map(|(n, p)| (n, split.matching.get(&p).unwrap().clone())).collect();
    let p = controlled_propagate_to_instance(&g, &h, &split.graph, &split.back_map, ValueMode::Symbolic, &rel).unwrap();
    assert!(are_isomorphic(&p.graph, &golden_graph("message_split_result.json")));
    valid(&p.graph, &split.graph, &p.hom, ValueMode::Symbolic);

    let canonical = propagate_to_instance(&g, &h, &split.graph, &split.back_map, ValueMode::Symbolic).unwrap();
    let messages = |g: &PropertyGraph, h: &Homomorphism, s: &PropertyGraph| {
        g.node_ids().filter(|n| !s.node(&h.node_map[*n]).unwrap().props.contains_key("firstName")).count()
    };
    let before = messages(&g, &h, &s);
    assert_eq!(messages(&canonical.graph, &canonical.hom, &split.graph), 2 * before);
    assert_eq!(canonical.graph.node_count(), g.node_count() + before);
}

fn c7_descriptive_then_prescriptive() {
    let gt = parse_ddl(&common::fixture("message.ddl")).unwrap();
    let (s, index) = graph_type_to_schema(&gt, ValueMode::Extensional).unwrap();
    let g = graph("fixtures/message_instance_untyped.json");
    let populated = propagate_to_schema(&s, &g, &hom("fixtures/message_hom.json"), &Homomorphism::identity(&g), ValueMode::Extensional)
        .unwrap();
    let mut h = Hierarchy::new(g, populated.graph, populated.hom, index, ValueMode::Extensional, Some(gt)).unwrap();
    for (n, ty) in [("n2", "post"), ("n6", "comment")] {
        let add = PropertySpec { key: "type".into(), data_type: None, values: vec![Value::str(ty)], mandatory: false };
        let smo = SchemaManipulation {
            op: SmoOp::Change { target: "Message".into(), add: vec![add], remove: vec![], instances: vec![id(n)] },
            direction: Direction::DataToSchema,
            relation: None,
        };
        h.apply(&smo).unwrap();
    }
    let message = h.schema.node(&h.index.nodes["Message"]).unwrap();
    assert_eq!(message.props.values("type"), Some(&[Value::str("comment"), Value::str("post")].into()));
    assert!(h.validate().unwrap().is_empty());

    let split = SchemaManipulation::from_json(
        r#"{
        "kind": "split", "target": "Message", "into": ["Post", "Comment"],
        "drop": {"Comment": ["imageFile"]},
        "restrict": {"Post": {"type": [{"str": "post"}]}, "Comment": {"type": [{"str": "comment"}]}},
        "loops": [["Comment", "Post"], ["Comment", "Comment"]],
        "relation": {"keep": {"n2": "Post", "n6": "Comment"}}
    }"#,
    )
    .unwrap();
    h.apply(&split).unwrap();
    assert!(are_isomorphic(&h.instance, &golden_graph("message_split_result.json")));
    assert!(h.validate().unwrap().is_empty());
    assert_eq!(h.trail.replay().unwrap(), h.schema);

    let out = h.graph_type().unwrap();
    for part in ["Post", "Comment"] {
        assert_eq!(out.element(part).unwrap().extends, vec!["Message".to_string()], "{part}");
    }
    assert!(out.edge_types.iter().any(|e| e.element == "REPLY_OF" && e.source == "Comment"));
}

fn golden_sections(name: &str) -> Vec<(String, String)> {
    let mut out: Vec<(String, String)> = Vec::new();
    for line in common::text(&format!("golden/{name}")).lines() {
        if let Some(section) = line.strip_prefix("//@section ") {
            out.push((section.to_owned(), String::new()));
        } else if let Some((_, body)) = out.last_mut() {
            body.push_str(line);
            body.push('\n');
        }
    }
    out
}

fn squeeze(s: &str) -> String {
    s.chars().filter(|c| !c.is_whitespace()).collect()
}

fn matches_golden(q: &QueryText, name: &str) {
    let golden = golden_sections(name);
    assert_eq!(q.sections.len(), golden.len(), "{name}");
    for ((section, body), emitted) in golden.iter().zip(&q.sections) {
        assert_eq!(section, &emitted.name);
        assert_eq!(squeeze(body), squeeze(&emitted.text), "{name}: {section}");
    }
}

fn c9_codegen() {
    matches_golden(&emit_clone_query(&Selector::id("a")), "clone_query.cypher");
    matches_golden(&emit_merge_query(&Selector::id("a"), &Selector::id("b"), true), "merge_query.cypher");
    for simple in [true, false] {
        for g in test_graphs(simple) {
            for n in ["a", "b", "c"] {
                let mut ran = g.clone();
                run_clone(&emit_clone_query(&Selector::id(n)), &mut ran);
                let mut expected = g.clone();
                expected.clone_node(&id(n)).unwrap();
                assert!(are_isomorphic(&ran, &expected), "clone of {n}");
            }
            for (a, b) in [("a", "b"), ("b", "a"), ("a", "c"), ("c", "b")] {
                let mut ran = g.clone();
                run_merge(&emit_merge_query(&Selector::id(a), &Selector::id(b), simple), &mut ran);
                let mut expected = g.clone();
                expected.merge_nodes(&id(a), &id(b)).unwrap();
                assert!(are_isomorphic(&ran, &expected), "merge of {b} into {a}, simple {simple}");
            }
        }
    }
}

fn main() {
    let criteria: Vec<(&str, fn())> = vec![
        ("1 full DDL parses with 29 element, 11 node and 20 edge types", c1_full_ddl),
        ("2 excerpt DDL interprets as the 3-node, 7-edge schema", c2_excerpt_schema),
        ("3 valid typing and three single-kind violations", c3_validation),
        ("4 merge-and-add rule gives the expected instance", c4_merge_and_add),
        ("5 merge propagated to the schema gives 2 nodes and 4 edges", c5_merge_to_schema),
        ("6 controlled clone propagation splits messages; canonical doubles them", c6_controlled_clone),
        ("7 descriptive additions then prescriptive split read back with inheritance", c7_descriptive_then_prescriptive),
        ("8 property suites", props::all),
        ("9 query templates match the golden files and graph-core", c9_codegen),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let start = std::time::Instant::now();
        match catch_unwind(AssertUnwindSafe(check)) {
            Ok(()) => println!("[PASS] {name} ({:.2?})", start.elapsed()),
            Err(_) => {
                failed += 1;
                println!("[FAIL] {name}");
            }
        }
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
