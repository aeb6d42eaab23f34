mod common;

use common::*;
use macroplan::pddl::{
    flatten_types, parse_domain, parse_problem, specialize_problem, write_domain, write_problem, Atom, PddlError,
};
use proptest::prelude::*;

const DOMAINS: [&str; 5] = ["chain", "depots", "rovers", "satellite", "tokens"];

#[test]
fn fixtures_parse() {
    for name in DOMAINS {
        let d = domain(name);
        assert_eq!(d.name, if name == "rovers" { "rover" } else { name });
        assert!(!d.operators.is_empty());
    }
    let d = domain("depots");
    assert!(d.hierarchy.is_subtype("crate", "surface"));
    assert!(d.hierarchy.is_subtype("depot", "place"));
    assert!(!d.hierarchy.is_subtype("truck", "surface"));
    assert!(!d.flattened);
}

#[test]
fn domain_round_trip() {
    for name in DOMAINS {
        let d = domain(name);
        let text = write_domain(&d, &[]).unwrap();
        let back = parse_domain(&text).unwrap();
        assert!(d.equivalent(&back), "{name}:\n{text}");
    }
}

#[test]
fn problem_round_trip() {
    let d = domain("depots");
    for f in ["depots/p01.pddl", "depots/p02.pddl"] {
        let p = problem(&d, f);
        let back = parse_problem(&write_problem(&p, &d), &d).unwrap();
        assert_eq!(p, back);
    }
}

#[test]
fn rejects_undeclared_predicate() {
    let d = domain("chain");
    let text = "(define (problem x) (:domain chain) (:objects a - cell) (:init (tok a)) (:goal (token a)))";
    assert!(matches!(parse_problem(text, &d), Err(PddlError::Undeclared { .. })));
}

#[test]
fn rejects_wrong_arity_and_type() {
    let d = domain("chain");
    let arity = "(define (problem x) (:domain chain) (:objects a - cell) (:init (token a a)) (:goal (token a)))";
    assert!(matches!(parse_problem(arity, &d), Err(PddlError::Arity { .. })));
    let t = domain("tokens");
    let ty = "(define (problem x) (:domain tokens) (:objects a - token s - slot) (:init (fits s a)) (:goal (filled s)))";
    assert!(matches!(parse_problem(ty, &t), Err(PddlError::TypeMismatch { .. })));
}

#[test]
fn rejects_other_domain() {
    let d = domain("chain");
    let text = "(define (problem x) (:domain tokens) (:objects a - cell) (:init) (:goal (token a)))";
    assert!(matches!(parse_problem(text, &d), Err(PddlError::DomainMismatch { .. })));
}

#[test]
fn rejects_unsupported_constructs() {
    let text = "(define (domain d) (:requirements :strips) (:predicates (p)) \
                (:action a :parameters () :precondition (or (p) (p)) :effect (p)))";
    assert!(parse_domain(text).is_err());
    assert!(matches!(parse_domain("(define (domain d)"), Err(PddlError::Syntax { .. })));
}

#[test]
fn flattening_produces_atomic_signatures() {
    let d = domain("depots");
    let flat = flatten_types(&d);
    assert!(flat.flattened);
    for p in &flat.predicates {
        assert!(p.params.iter().all(|x| flat.hierarchy.is_atomic(&x.ty)), "{}", p.name);
    }
    for op in &flat.operators {
        assert!(op.params.iter().all(|x| flat.hierarchy.is_atomic(&x.ty)), "{}", op.name);
        assert!(d.operator(flat.original_operator(&op.name)).is_some());
    }
    // drive: truck x place x place over two atomic places.
    let drives = flat.operators.iter().filter(|o| flat.original_operator(&o.name) == "drive").count();
    assert_eq!(drives, 4);
    // on: crate x surface over {pallet, crate}.
    let ons = flat.predicates.iter().filter(|p| flat.original_predicate(&p.name) == "on").count();
    assert_eq!(ons, 2);
}

#[test]
fn specialized_problem_uses_flat_predicates() {
    let d = domain("depots");
    let flat = flatten_types(&d);
    let p = problem(&d, "depots/p01.pddl");
    let sp = specialize_problem(&d, &p);
    assert_eq!(sp.init.len(), p.init.len());
    for (a, b) in sp.init.iter().zip(&p.init) {
        assert!(flat.predicate(&a.predicate).is_some(), "{a}");
        assert_eq!(flat.original_predicate(&a.predicate), b.predicate);
        assert_eq!(a.args, b.args);
    }
}

#[test]
fn flattening_an_untyped_hierarchy_is_identity() {
    let d = domain("chain");
    let flat = flatten_types(&d);
    assert_eq!(flat.operators.len(), d.operators.len());
    assert_eq!(flat.predicates.len(), d.predicates.len());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn generated_problems_round_trip(seed in 0u64..1000, crates in 1usize..6, goals in 0usize..4) {
        let d = domain("depots");
        let p = parse(&d, &depots(1, 1, 1, crates, goals.min(crates), seed));
        let back = parse_problem(&write_problem(&p, &d), &d).unwrap();
        prop_assert_eq!(&p, &back);
        prop_assert!(p.init.iter().all(|a: &Atom| d.predicate(&a.predicate).is_some()));
    }

    #[test]
    fn satellite_problems_round_trip(seed in 0u64..1000, sats in 1usize..4, goals in 1usize..8) {
        let d = domain("satellite");
        let p = parse(&d, &satellite(sats, sats + 1, 3, 6, goals, seed));
        let back = parse_problem(&write_problem(&p, &d), &d).unwrap();
        prop_assert_eq!(p, back);
    }
}
