//! Randomised property suites, each over a fixed seed.

use std::collections::{BTreeSet, HashSet};

use pgse_core::graph::{dictionary_union, ElementData, ObjectId, PropertyDictionary, PropertyGraph};
use pgse_core::hom::{check_homomorphism, compose, find_homomorphisms, Homomorphism, ValueMode};
use pgse_core::iso::are_isomorphic;
use pgse_core::propagation::{propagate_to_instance, propagate_to_schema};
use pgse_core::rewrite::{apply_rule, derive_actions};
use pgse_core::{DataType, Value};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};

use crate::gen::{self, Rng8, RuleShape};

const CASES: usize = 1000;

fn rng(salt: u64) -> Rng8 {
    Rng8::seed_from_u64(0x5eed_0000 + salt)
}

fn mode(rng: &mut Rng8) -> ValueMode {
    if rng.gen_bool(0.5) {
        ValueMode::Symbolic
    } else {
        ValueMode::Extensional
    }
}

fn assert_valid(g: &PropertyGraph, s: &PropertyGraph, h: &Homomorphism, mode: ValueMode, case: usize) {
    let r = check_homomorphism(g, s, h, mode).unwrap();
    assert!(r.is_empty(), "case {case}: {:?}", r.violations);
}

fn no_marks(_: &ObjectId) -> BTreeSet<String> {
    BTreeSet::new()
}

/// (a) a rule applied to either side, followed by the matching propagation,
/// leaves a valid typing.
pub fn rewrite_then_propagate() {
    let mut rng = rng(1);
    let mut seen = Coverage::default();
    for case in 0..CASES {
        let mode = mode(&mut rng);
        let s = gen::schema(&mut rng, 4, mode == ValueMode::Symbolic);
        let (g, h) = gen::instance(&mut rng, &s, 5);
        assert_valid(&g, &s, &h, mode, case);

        let shape = RuleShape { restrictive: true, expansive: true, no_new_marks: true };
        let (r, m) = gen::rule(&mut rng, &s, shape, &no_marks);
        seen.note(&r);
        let app = apply_rule(&s, &r, &m).unwrap();
        let p = propagate_to_instance(&g, &h, &app.restricted.graph, &app.restricted.back_map, mode).unwrap();
        let h_plus = compose(&p.hom, &app.expanded.fwd_map).unwrap();
        assert_valid(&p.graph, app.graph(), &h_plus, mode, case);

        let shape = RuleShape { restrictive: true, expansive: true, no_new_marks: false };
        let (r, m) = gen::rule(&mut rng, &g, shape, &no_marks);
        seen.note(&r);
        let app = apply_rule(&g, &r, &m).unwrap();
        let h_minus = compose(&app.restricted.back_map, &h).unwrap();
        let p = propagate_to_schema(&s, app.graph(), &h_minus, &app.expanded.fwd_map, mode).unwrap();
        assert_valid(app.graph(), &p.graph, &p.hom, mode, case);
    }
    seen.check();
}

/// Counts rules exercising each elementary transformation, so that a suite
/// cannot pass vacuously.
#[derive(Default)]
struct Coverage {
    deletes: usize,
    clones: usize,
    merges: usize,
    adds: usize,
}

impl Coverage {
    fn note(&mut self, r: &pgse_core::Rule) {
        let plan = derive_actions(r);
        self.deletes += !plan.node_deletes.is_empty() as usize;
        self.clones += !plan.clones.is_empty() as usize;
        self.merges += !plan.merges.is_empty() as usize;
        self.adds += !plan.node_adds.is_empty() as usize;
    }

    fn check(&self) {
        for (what, n) in [("deletes", self.deletes), ("clones", self.clones), ("merges", self.merges), ("adds", self.adds)] {
            assert!(n >= CASES / 10, "only {n} rules with {what}");
        }
    }
}

/// (b) dictionary union is an associative, commutative, idempotent monoid.
pub fn dictionary_laws() {
    let mut rng = rng(2);
    let empty = PropertyDictionary::new();
    for _ in 0..CASES {
        let (a, b, c) = (gen::dictionary(&mut rng), gen::dictionary(&mut rng), gen::dictionary(&mut rng));
        assert_eq!(dictionary_union(&a, &empty), a);
        assert_eq!(dictionary_union(&empty, &a), a);
        assert_eq!(
            dictionary_union(&dictionary_union(&a, &b), &c),
            dictionary_union(&a, &dictionary_union(&b, &c))
        );
        assert_eq!(dictionary_union(&a, &b), dictionary_union(&b, &a));
        assert_eq!(dictionary_union(&a, &a), a);
        let u = dictionary_union(&a, &b);
        assert!(a.is_subdictionary_of(&u) && b.is_subdictionary_of(&u));
    }
}

/// (c) merging a clone back into its original gives the graph back.
pub fn clone_merge_back() {
    let mut rng = rng(3);
    for case in 0..CASES {
        let g = gen::any_graph(&mut rng, 5, true);
        let Some(n) = g.node_ids().cloned().collect::<Vec<_>>().choose(&mut rng).cloned() else {
            continue;
        };
        let mut h = g.clone();
        let c = h.clone_node(&n).unwrap();
        assert_eq!(h.node_count(), g.node_count() + 1);
        h.merge_nodes(&n, &c).unwrap();
        assert!(are_isomorphic(&g, &h), "case {case}: {n}");
    }
}

fn conforms(mode: ValueMode, v: &Value, domain: &BTreeSet<Value>) -> bool {
    domain.contains(v)
        || (mode == ValueMode::Symbolic && matches!(v, Value::Int(_)) && domain.contains(&DataType::Integer.token()))
}

fn element_ok(x: &ElementData, t: &ElementData, mode: ValueMode) -> bool {
    x.props.iter().all(|(k, vs)| t.props.values(k).is_some_and(|d| vs.iter().all(|v| conforms(mode, v, d))))
        && t.mandatory.is_subset(&x.mandatory)
}

/// Direct reading of the four homomorphism conditions.
fn naive(g: &PropertyGraph, s: &PropertyGraph, h: &Homomorphism, mode: ValueMode) -> bool {
    g.nodes().all(|(n, d)| element_ok(d, s.node(&h.node_map[n]).unwrap(), mode))
        && g.edges().all(|(_, e)| {
            s.edges_between(&h.node_map[&e.source], &h.node_map[&e.target])
                .any(|f| element_ok(&e.data, &s.edge(f).unwrap().data, mode))
        })
}

fn all_maps(g: &PropertyGraph, s: &PropertyGraph) -> Vec<Homomorphism> {
    let targets: Vec<ObjectId> = s.node_ids().cloned().collect();
    let mut maps = vec![Homomorphism::new()];
    for n in g.node_ids() {
        maps = maps
            .into_iter()
            .flat_map(|m| {
                targets.iter().map(move |t| {
                    let mut m = m.clone();
                    m.insert(n.clone(), t.clone());
                    m
                })
            })
            .collect();
    }
    maps
}

/// (d) the checker and the enumerator agree with each other and with a naive
/// reading of the conditions over every map between two small graphs.
pub fn checker_matches_enumeration() {
    let mut rng = rng(4);
    let mut valid_seen = 0;
    for case in 0..CASES {
        let mode = mode(&mut rng);
        let s = gen::schema(&mut rng, 4, mode == ValueMode::Symbolic);
        let g = if rng.gen_bool(0.6) { gen::instance(&mut rng, &s, 5).0 } else { gen::any_graph(&mut rng, 5, true) };
        let found: HashSet<Homomorphism> = find_homomorphisms(&g, &s, mode, None).into_iter().collect();
        for m in all_maps(&g, &s) {
            let checked = check_homomorphism(&g, &s, &m, mode).unwrap().is_empty();
            assert_eq!(checked, found.contains(&m), "case {case}: {m:?}");
            assert_eq!(checked, naive(&g, &s, &m, mode), "case {case}: {m:?}");
            valid_seen += checked as usize;
        }
    }
    assert!(valid_seen > CASES / 2);
}

/// (e) expansive schema rewrites and restrictive instance rewrites keep the
/// typing valid by composition alone.
pub fn composition_suffices() {
    let mut rng = rng(5);
    for case in 0..CASES {
        let mode = mode(&mut rng);
        let s = gen::schema(&mut rng, 4, mode == ValueMode::Symbolic);
        let (g, h) = gen::instance(&mut rng, &s, 5);

        let shape = RuleShape { restrictive: false, expansive: true, no_new_marks: true };
        let (r, m) = gen::rule(&mut rng, &s, shape, &no_marks);
        assert!(r.is_expansive());
        let app = apply_rule(&s, &r, &m).unwrap();
        assert_valid(&g, app.graph(), &compose(&h, &app.expanded.fwd_map).unwrap(), mode, case);

        let shape = RuleShape { restrictive: true, expansive: false, no_new_marks: false };
        let protect = gen::type_marks(&s, &h);
        let (r, m) = gen::rule(&mut rng, &g, shape, &protect);
        assert!(r.is_restrictive());
        let app = apply_rule(&g, &r, &m).unwrap();
        assert_valid(app.graph(), &s, &compose(&app.restricted.back_map, &h).unwrap(), mode, case);
    }
}

pub fn all() {
    let suites: [(&str, fn()); 5] = [
        ("a", rewrite_then_propagate),
        ("b", dictionary_laws),
        ("c", clone_merge_back),
        ("d", checker_matches_enumeration),
        ("e", composition_suffices),
    ];
    let mut failed = Vec::new();
    for (name, suite) in suites {
        let start = std::time::Instant::now();
        match std::panic::catch_unwind(suite) {
            Ok(()) => println!("    ({name}) ok, {CASES} cases ({:.2?})", start.elapsed()),
            Err(_) => {
                println!("    ({name}) failed");
                failed.push(name);
            }
        }
    }
    assert!(failed.is_empty(), "property suites failed: {failed:?}");
}
