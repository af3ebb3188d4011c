mod common;

use std::collections::BTreeSet;

use common::{fixture, golden_graph};
use pgse_core::ddl::*;
use pgse_core::hom::ValueMode;
use pgse_core::iso::are_isomorphic;
use pgse_core::{DataType, DdlError};

fn snb() -> GraphType {
    parse_ddl(&fixture("snb.ddl")).unwrap()
}

fn excerpt() -> GraphType {
    parse_ddl(&fixture("snb_excerpt.ddl")).unwrap()
}

fn wrap(body: &str) -> String {
    format!("CREATE GRAPH TYPE t ({body})")
}

#[test]
fn full_snb_counts() {
    let gt = snb();
    assert_eq!(gt.element_types.len() + gt.implicit_edge_labels().len(), 29);
    assert_eq!(gt.node_types.len(), 11);
    assert_eq!(gt.edge_types.len(), 20);
    assert!(check_graph_type(&gt).is_empty());
    let city = gt.edge_types.iter().find(|e| e.source == "City").unwrap();
    assert_eq!(city.cardinality, Some(1));
}

#[test]
fn message_with_optional_content() {
    let gt = parse_ddl(&wrap("Message { content: STRING?, length: INTEGER }")).unwrap();
    let m = gt.element("Message").unwrap();
    assert_eq!(
        m.properties,
        vec![PropertyType::optional("content", DataType::String), PropertyType::mandatory("length", DataType::Integer)]
    );
    assert!(m.extends.is_empty());
}

#[test]
fn both_inheritance_tokens() {
    let body = "Message { content: STRING?, length: INTEGER }, Post <: Message { language: STRING? }, Note :: Message {}";
    let gt = parse_ddl(&wrap(body)).unwrap();
    assert_eq!(gt.element("Post").unwrap().extends, vec!["Message".to_string()]);
    assert_eq!(gt.element("Note").unwrap().extends, vec!["Message".to_string()]);

    let (props, mand, labels) = exposed_sets(&gt, "Post").unwrap();
    let keys: BTreeSet<&str> = props.iter().map(|p| p.key.as_str()).collect();
    assert_eq!(keys, ["content", "language", "length"].into());
    assert_eq!(mand, [PropertyType::mandatory("length", DataType::Integer)].into());
    assert_eq!(labels, ["Message".to_string(), "Post".to_string()].into());

    let (props, _, labels) = exposed_sets(&gt, "Message").unwrap();
    assert_eq!(props.len(), 2);
    assert_eq!(labels.len(), 1);
    assert!(matches!(exposed_sets(&gt, "Nope"), Err(DdlError::UnknownLabel(_))));
}

#[test]
fn comment_inherits_every_message_property() {
    let gt = snb();
    let e = gt.exposed("Comment").unwrap();
    assert_eq!(e.keys(), ["browserUsed", "content", "creationDate", "length", "locationIP"].into());
}

#[test]
fn diagnostics() {
    let cyclic = parse_ddl_unchecked(&wrap("A <: A {}")).unwrap();
    assert_eq!(check_graph_type(&cyclic), vec![Diagnostic::CyclicInheritance { label: "A".into() }]);
    let clash = parse_ddl_unchecked(&wrap("A { x: STRING }, B <: A { x: INTEGER }")).unwrap();
    assert_eq!(
        check_graph_type(&clash),
        vec![Diagnostic::DuplicatePropertyKey { label: "B".into(), key: "x".into() }]
    );
    assert!(check_graph_type(&excerpt()).is_empty());
    assert!(matches!(parse_ddl(&wrap("A <: A {}")), Err(DdlError::Invalid(_))));
}

#[test]
fn syntax_errors_carry_positions() {
    match parse_ddl("CREATE GRAPH TYPE t (\n  A { x STRING }\n)") {
        Err(DdlError::Syntax { line, column, .. }) => assert_eq!((line, column), (2, 9)),
        other => panic!("{other:?}"),
    }
}

#[test]
fn excerpt_interprets_as_excerpt_schema() {
    let (s, index) = graph_type_to_schema(&excerpt(), ValueMode::Symbolic).unwrap();
    assert_eq!((s.node_count(), s.edge_count()), (3, 7));
    assert!(are_isomorphic(&s, &golden_graph("excerpt_schema.json")));
    let mut labels: Vec<(String, String, String)> = s
        .edges()
        .map(|(e, edge)| {
            (
                index.edge_label(e).unwrap().to_owned(),
                index.label_of(&edge.source).unwrap().to_owned(),
                index.label_of(&edge.target).unwrap().to_owned(),
            )
        })
        .collect();
    labels.sort();
    let golden: Vec<(String, String, String)> = serde_json::from_str(&common::text("golden/excerpt_edge_labels.json")).unwrap();
    assert_eq!(labels, golden);
}

#[test]
fn extensional_schema_has_empty_value_sets() {
    let (s, _) = graph_type_to_schema(&excerpt(), ValueMode::Extensional).unwrap();
    assert!(s.nodes().all(|(_, d)| d.props.iter().all(|(_, v)| v.is_empty())));
    let person = s.node(&"Person".into()).unwrap();
    assert!(person.is_mandatory("firstName"));
}

#[test]
fn single_node_type() {
    let gt = parse_ddl(&wrap("A {}, (A)")).unwrap();
    let (s, _) = graph_type_to_schema(&gt, ValueMode::Symbolic).unwrap();
    assert_eq!((s.node_count(), s.edge_count()), (1, 0));
}

#[test]
fn full_snb_schema_needs_force() {
    let gt = snb();
    let collisions = interpretation_diagnostics(&gt);
    assert_eq!(collisions.len(), 1);
    assert!(matches!(graph_type_to_schema(&gt, ValueMode::Symbolic), Err(DdlError::Invalid(_))));
    let (s, index) = graph_type_to_schema_with(&gt, ValueMode::Symbolic, true).unwrap();
    assert_eq!(s.node_count(), 11);
    assert_eq!(s.edge_count(), 24);
    let count = |label: &str| index.edges.values().filter(|l| *l == label).count();
    assert_eq!(count("REPLY_OF"), 2);
    assert_eq!(count("HAS_CREATOR"), 2);
    assert_eq!(count("LIKES"), 2);
    // Forum-HAS_TAG->Tag is unaffected; Message-HAS_TAG->Tag adds Post and Comment
    assert_eq!(count("HAS_TAG"), 3);
}

#[test]
fn print_parse_round_trip() {
    for gt in [excerpt(), snb()] {
        let text = print_ddl(&gt);
        assert_eq!(parse_ddl(&text).unwrap(), gt);
    }
    let printed = print_ddl(&snb());
    assert_eq!(printed.lines().filter(|l| l.contains('{')).count(), 29);
    assert_eq!(print_ddl(&GraphType::new("name")), "CREATE GRAPH TYPE name (\n)");
}

#[test]
fn graph_type_json_mirror() {
    let gt = excerpt();
    let json = serde_json::to_string(&gt).unwrap();
    assert_eq!(serde_json::from_str::<GraphType>(&json).unwrap(), gt);
}
