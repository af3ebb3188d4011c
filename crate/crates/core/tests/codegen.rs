mod common;

use std::collections::BTreeMap;

use common::stub::{run_clone, run_merge, test_graphs};
use common::{hom, rule};
use pgse_core::codegen::*;
use pgse_core::graph::ObjectId;
use pgse_core::iso::are_isomorphic;
use pgse_core::rewrite::{derive_actions, Rule};

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

fn assert_matches_golden(q: &QueryText, name: &str) {
    let golden = golden_sections(name);
    let names: Vec<&str> = golden.iter().map(|(n, _)| n.as_str()).collect();
    assert_eq!(q.names(), names);
    for ((section, body), emitted) in golden.iter().zip(&q.sections) {
        assert_eq!(squeeze(body), squeeze(&emitted.text), "section {section}");
    }
}

#[test]
fn clone_query_matches_golden() {
    assert_matches_golden(&emit_clone_query(&Selector::id("a")), "clone_query.cypher");
}

#[test]
fn merge_query_matches_golden() {
    assert_matches_golden(&emit_merge_query(&Selector::id("a"), &Selector::id("b"), true), "merge_query.cypher");
}

#[test]
fn clone_query_shape() {
    let q = emit_clone_query(&Selector::id("a"));
    assert!(q.sections[0].text.contains("MATCH (a { id : 'a' })"));
    assert_eq!(q.count("copy-self-loops"), 1);
    assert_eq!(q.sections.len(), 8);
}

#[test]
fn non_simple_merge_has_no_edge_union() {
    let simple = emit_merge_query(&Selector::id("a"), &Selector::id("b"), true);
    assert!(simple.section("merge-props").unwrap().text.contains("// Add properties of 'b' to 'a'"));
    assert_eq!(simple.count("handle-loops"), 1);

    let q = emit_merge_query(&Selector::id("a"), &Selector::id("b"), false);
    for gone in ["merge-out-edges", "merge-in-edges", "handle-loops"] {
        assert_eq!(q.count(gone), 0);
    }
    assert!(!q.text.contains("MERGE (merged_node)"));
    assert_eq!(q.count("retarget-out-edges"), 1);
    assert_eq!(q.count("delete"), 1);
}

#[test]
fn emission_is_deterministic() {
    let r = rule("fixtures/merge_posts_rule.json");
    let sel = selectors(&hom("fixtures/merge_posts_matching.json"));
    assert_eq!(emit_rule_query(&r, &sel).unwrap().text, emit_rule_query(&r, &sel).unwrap().text);
}

fn selectors(m: &pgse_core::Homomorphism) -> BTreeMap<ObjectId, Selector> {
    m.iter().map(|(x, n)| (x.clone(), Selector::id(n.as_str()))).collect()
}

#[test]
fn merge_and_add_rule_query() {
    let r = rule("fixtures/merge_posts_rule.json");
    let plan = derive_actions(&r);
    let q = emit_rule_query(&r, &selectors(&hom("fixtures/merge_posts_matching.json"))).unwrap();
    assert_eq!(q.names()[0], "match");
    assert_eq!(q.count("merge-props"), plan.merges.len());
    assert_eq!(q.count("merge-props"), 1);
    assert_eq!(q.count("create-node"), 1);
    assert_eq!(q.count("create-edge"), 2);
    assert_eq!(q.count("create-clone"), 0);
}

#[test]
fn clone_rule_query() {
    let r = rule("fixtures/message_split_rule.json");
    let plan = derive_actions(&r);
    let q = emit_rule_query(&r, &selectors(&hom("fixtures/message_split_matching.json"))).unwrap();
    let copies: usize = plan.clones.iter().map(|(_, k)| k).sum();
    assert_eq!(q.count("create-clone"), copies);
    assert_eq!(q.count("set-clone-id"), copies);
    assert_eq!(q.count("delete-edge"), plan.edge_deletes.len());
    assert!(q.text.contains("REMOVE x.imageFile"));
}

#[test]
fn identity_rule_query_only_matches() {
    let r = rule("fixtures/merge_posts_rule.json");
    let id = Rule::identity(&r.lhs);
    let q = emit_rule_query(&id, &selectors(&hom("fixtures/merge_posts_matching.json"))).unwrap();
    assert_eq!(q.names(), vec!["match"]);
    assert!(q.text.contains("WHERE id(x0) <> id(x1)"));
}

#[test]
fn clone_query_behaves_like_clone_node() {
    for simple in [true, false] {
        for g in test_graphs(simple) {
            for n in ["a", "b", "c"] {
                let mut ran = g.clone();
                run_clone(&emit_clone_query(&Selector::id(n)), &mut ran);
                let mut expected = g.clone();
                expected.clone_node(&ObjectId::new(n)).unwrap();
                assert!(are_isomorphic(&ran, &expected), "clone of {n}");
            }
        }
    }
}

#[test]
fn merge_query_behaves_like_merge_nodes() {
    for simple in [true, false] {
        for g in test_graphs(simple) {
            for (a, b) in [("a", "b"), ("b", "a"), ("a", "c"), ("c", "b")] {
                let mut ran = g.clone();
                run_merge(&emit_merge_query(&Selector::id(a), &Selector::id(b), simple), &mut ran);
                let mut expected = g.clone();
                expected.merge_nodes(&ObjectId::new(a), &ObjectId::new(b)).unwrap();
                assert!(are_isomorphic(&ran, &expected), "merge of {b} into {a}, simple {simple}");
            }
        }
    }
}
