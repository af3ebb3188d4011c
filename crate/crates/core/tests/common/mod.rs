#![allow(dead_code)]

pub mod stub;

use std::path::PathBuf;

use pgse_core::graph::PropertyGraph;
use pgse_core::hom::Homomorphism;
use pgse_core::rewrite::Rule;

pub fn path(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests").join(rel)
}

pub fn text(rel: &str) -> String {
    std::fs::read_to_string(path(rel)).unwrap_or_else(|e| panic!("{rel}: {e}"))
}

pub fn graph(rel: &str) -> PropertyGraph {
    PropertyGraph::from_json(&text(rel)).unwrap()
}

pub fn hom(rel: &str) -> Homomorphism {
    Homomorphism::from_json(&text(rel)).unwrap()
}

pub fn rule(rel: &str) -> Rule {
    Rule::from_json(&text(rel)).unwrap()
}

pub fn fixture(name: &str) -> String {
    text(&format!("fixtures/{name}"))
}

pub fn golden_graph(name: &str) -> PropertyGraph {
    graph(&format!("golden/{name}"))
}
