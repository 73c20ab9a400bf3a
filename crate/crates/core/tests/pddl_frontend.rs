mod common;

use std::collections::BTreeSet;
use std::fmt::Write;

use common::{fixture, rng, PDDL_FIXTURES};
use ipcgraph::asg::{assert_acyclic, build_asg, AbstractStructure, AsgOptions, SymbolType};
use ipcgraph::pddl::{parse_pddl, print_domain, print_problem, to_abstract_structure, PddlDocument, PddlError, Source};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

fn parse_fixture(domain: &str, problem: &str) -> PddlDocument {
    parse_pddl(&fixture(domain), &fixture(problem)).unwrap()
}

fn reparse(doc: &PddlDocument) -> PddlDocument {
    parse_pddl(&print_domain(doc), &print_problem(doc)).unwrap()
}

fn symbols(doc: &PddlDocument) -> BTreeSet<(String, SymbolType)> {
    let mut out = BTreeSet::new();
    to_abstract_structure(doc).for_each_symbol(&mut |s| {
        out.insert((s.name.clone(), s.ty));
    });
    out
}

/// Every declared name and every schema variable shows up as a symbol.
fn assert_vocabulary_covered(doc: &PddlDocument) {
    let syms = symbols(doc);
    let has = |name: &str, ty| syms.contains(&(name.to_string(), ty));
    for p in &doc.predicates {
        assert!(has(&p.name, SymbolType::Predicate), "predicate {}", p.name);
    }
    for f in &doc.functions {
        assert!(has(&f.name, SymbolType::Function), "function {}", f.name);
    }
    for o in doc.constants.iter().chain(&doc.objects) {
        assert!(has(&o.name, SymbolType::Constant), "object {}", o.name);
    }
    for op in &doc.operators {
        for p in &op.parameters {
            assert!(has(&p.name, SymbolType::Variable), "parameter {}", p.name);
        }
        for ce in &op.effects {
            for p in &ce.params {
                assert!(has(&p.name, SymbolType::Variable), "parameter {}", p.name);
            }
        }
    }
    for ax in &doc.axioms {
        for p in ax.parameters.iter().chain(&ax.quantified) {
            assert!(has(&p.name, SymbolType::Variable), "variable {}", p.name);
        }
    }
}

#[test]
fn gripper_shape() {
    let doc = parse_fixture("gripper-domain.pddl", "gripper-p01.pddl");
    assert_eq!(doc.operators.len(), 3);
    assert_eq!(doc.predicates.len(), 4);
    assert_eq!(doc.objects.len(), 6);
    assert_eq!(doc.init.len(), 5);
    assert_eq!(doc.goal.len(), 2);
}

#[test]
fn switches_shape() {
    let doc = parse_fixture("switches-domain.pddl", "switches-p01.pddl");
    assert_eq!(doc.axioms.len(), 2);
    assert_eq!(doc.axioms[0].quantified.len(), 1);
    assert_eq!(doc.constants.len(), 1);
    let rewire = doc.operators.iter().find(|o| o.name == "rewire").unwrap();
    assert_eq!(rewire.effects.len(), 3);
    assert_eq!(rewire.effects[2].params.len(), 1);
    assert_eq!(rewire.effects[2].condition.len(), 2);
    assert!(rewire.cost.is_some());
    assert!(doc.metric.is_some());
}

#[test]
fn fixtures_round_trip_and_cover_vocabulary() {
    for (d, p) in PDDL_FIXTURES {
        let doc = parse_fixture(d, p);
        assert_eq!(reparse(&doc), doc, "{d}");
        assert_vocabulary_covered(&doc);
        for sharing in [true, false] {
            let opts = AsgOptions {
                sharing,
                ..AsgOptions::default()
            };
            let g = build_asg(&to_abstract_structure(&doc), &opts).unwrap();
            assert_acyclic(&g).unwrap();
        }
    }
}

#[test]
fn sharing_merges_repeated_atoms() {
    let doc = parse_fixture("gripper-domain.pddl", "gripper-p01.pddl");
    let root = to_abstract_structure(&doc);
    let shared = build_asg(&root, &AsgOptions::default()).unwrap();
    let plain = build_asg(
        &root,
        &AsgOptions {
            sharing: false,
            ..AsgOptions::default()
        },
    )
    .unwrap();
    assert!(shared.num_nodes() < plain.num_nodes());
}

#[test]
fn error_positions() {
    let domain = fixture("gripper-domain.pddl");
    let problem = fixture("gripper-p01.pddl");
    let bad = problem.replace("(at ball2 rooma)", "(at ball2 rooma rooma)");
    let err = parse_pddl(&domain, &bad).unwrap_err();
    assert!(matches!(err, PddlError::Validation { .. }));
    assert_eq!(
        (err.pos().source, err.pos().line, err.pos().col),
        (Source::Problem, 10, 10)
    );

    let bad = domain.replace("(at-robby ?to)", "(at-robby ?to");
    assert!(matches!(parse_pddl(&bad, &problem), Err(PddlError::Parse { .. })));

    let bad = domain.replace(
        "(:types room ball gripper)",
        "(:types room ball gripper)\n  (:durative-action x)",
    );
    assert!(matches!(parse_pddl(&bad, &problem), Err(PddlError::Validation { .. })));

    let bad = problem.replace("(:domain gripper-strips)", "(:domain other)");
    let err = parse_pddl(&domain, &bad).unwrap_err();
    assert_eq!(err.pos().source, Source::Problem);
}

#[test]
fn deep_nesting_is_an_error_not_a_crash() {
    let deep = format!("{}{}", "(".repeat(100_000), ")".repeat(100_000));
    assert!(parse_pddl(&deep, &deep).is_err());
}

#[test]
fn big_numbers_are_exact() {
    let domain = fixture("switches-domain.pddl");
    let problem =
        fixture("switches-p01.pddl").replace("(= (effort s1) 2)", "(= (effort s1) 123456789012345678901234567890)");
    let doc = parse_pddl(&domain, &problem).unwrap();
    assert!(symbols(&doc).contains(&("123456789012345678901234567890".to_string(), SymbolType::Number)));
    assert_eq!(reparse(&doc), doc);
}

/// Random well-formed domain and problem in the supported fragment.
fn random_task(r: &mut ChaCha8Rng) -> (String, String) {
    let n_types = r.gen_range(0..4);
    let types: Vec<String> = (0..n_types).map(|i| format!("t{i}")).collect();
    let type_of = |r: &mut ChaCha8Rng| {
        if types.is_empty() || r.gen_bool(0.3) {
            "object".to_string()
        } else {
            types.choose(r).unwrap().clone()
        }
    };
    let arities: Vec<usize> = (0..r.gen_range(1..6)).map(|_| r.gen_range(0..4)).collect();
    let n_derived = r.gen_range(0..=arities.len().min(2));
    let constants: Vec<String> = (0..r.gen_range(0..3)).map(|i| format!("k{i}")).collect();
    let objects: Vec<String> = (0..r.gen_range(1..5)).map(|i| format!("o{i}")).collect();
    let costs = r.gen_bool(0.5);

    let mut d = String::from("(define (domain rnd)\n (:requirements :strips :typing :negative-preconditions :equality :conditional-effects :derived-predicates :action-costs)\n");
    if !types.is_empty() {
        d.push_str(" (:types");
        for (i, t) in types.iter().enumerate() {
            let parent = if i == 0 || r.gen_bool(0.5) {
                "object".to_string()
            } else {
                types[r.gen_range(0..i)].clone()
            };
            let _ = write!(d, " {t} - {parent}");
        }
        d.push_str(")\n");
    }
    if !constants.is_empty() {
        d.push_str(" (:constants");
        for c in &constants {
            let _ = write!(d, " {c} - {}", type_of(r));
        }
        d.push_str(")\n");
    }
    d.push_str(" (:predicates");
    for (i, &a) in arities.iter().enumerate() {
        let _ = write!(d, " (p{i}");
        for j in 0..a {
            let _ = write!(d, " ?v{j} - {}", type_of(r));
        }
        d.push(')');
    }
    d.push_str(")\n");
    if costs {
        d.push_str(" (:functions (total-cost) - number (w ?a) - number)\n");
    }

    // Derived predicates are the last `n_derived` ones.
    let basic = arities.len() - n_derived;
    let literal = |r: &mut ChaCha8Rng, preds: std::ops::Range<usize>, vars: &[String], allow_eq: bool| {
        let args: Vec<String> = vars.iter().chain(&constants).cloned().collect();
        if allow_eq && !args.is_empty() && r.gen_bool(0.15) {
            return format!("(not (= {} {}))", args.choose(r).unwrap(), args.choose(r).unwrap());
        }
        let p = r.gen_range(preds);
        if arities[p] > 0 && args.is_empty() {
            return String::new();
        }
        let atom = std::iter::once(format!("p{p}"))
            .chain((0..arities[p]).map(|_| args.choose(r).unwrap().clone()))
            .collect::<Vec<_>>()
            .join(" ");
        if r.gen_bool(0.3) {
            format!("(not ({atom}))")
        } else {
            format!("({atom})")
        }
    };
    for a in 0..r.gen_range(0..4) {
        let params: Vec<String> = (0..r.gen_range(0..4)).map(|j| format!("?x{j}")).collect();
        let _ = write!(d, " (:action act{a}\n  :parameters (");
        for p in &params {
            let _ = write!(d, "{p} - {} ", type_of(r));
        }
        d.push_str(")\n  :precondition (and");
        for _ in 0..r.gen_range(0..4) {
            let _ = write!(d, " {}", literal(r, 0..arities.len(), &params, true));
        }
        d.push_str(")\n  :effect (and");
        if basic > 0 {
            for _ in 0..r.gen_range(0..4) {
                if r.gen_bool(0.3) {
                    let mut inner = params.clone();
                    inner.push("?y".to_string());
                    let _ = write!(
                        d,
                        " (forall (?y - {}) (when (and {}) {}))",
                        type_of(r),
                        literal(r, 0..arities.len(), &inner, true),
                        literal(r, 0..basic, &inner, false)
                    );
                } else {
                    let _ = write!(d, " {}", literal(r, 0..basic, &params, false));
                }
            }
        }
        if costs {
            match (r.gen_range(0..3), params.first()) {
                (0, _) => {}
                (1, Some(p)) => {
                    let _ = write!(d, " (increase (total-cost) (w {p}))");
                }
                _ => {
                    let _ = write!(d, " (increase (total-cost) {})", r.gen_range(0..100));
                }
            }
        }
        d.push_str("))\n");
    }
    for p in basic..arities.len() {
        let head: Vec<String> = (0..arities[p]).map(|j| format!("?h{j}")).collect();
        let _ = write!(d, " (:derived (p{p}");
        for h in &head {
            let _ = write!(d, " {h} - {}", type_of(r));
        }
        d.push(')');
        let quantified = r.gen_bool(0.5);
        let mut vars = head.clone();
        if quantified {
            vars.push("?q".to_string());
            let _ = write!(d, " (exists (?q - {})", type_of(r));
        }
        d.push_str(" (and");
        for _ in 0..r.gen_range(1..4) {
            let _ = write!(d, " {}", literal(r, 0..arities.len(), &vars, true));
        }
        d.push(')');
        if quantified {
            d.push(')');
        }
        d.push_str(")\n");
    }
    d.push(')');

    let ground: Vec<String> = objects.iter().chain(&constants).cloned().collect();
    let mut p = String::from("(define (problem rnd-1) (:domain rnd)\n (:objects");
    for o in &objects {
        let _ = write!(p, " {o} - {}", type_of(r));
    }
    p.push_str(")\n (:init");
    if basic > 0 {
        for _ in 0..r.gen_range(0..6) {
            let pred = r.gen_range(0..basic);
            let _ = write!(p, " (p{pred}");
            for _ in 0..arities[pred] {
                let _ = write!(p, " {}", ground.choose(r).unwrap());
            }
            p.push(')');
        }
    }
    if costs {
        p.push_str(" (= (total-cost) 0)");
        for o in &objects {
            let _ = write!(p, " (= (w {o}) {})", r.gen_range(0..10));
        }
    }
    p.push_str(")\n (:goal (and");
    for _ in 0..r.gen_range(0..4) {
        let _ = write!(p, " {}", literal(r, 0..arities.len(), &objects, false));
    }
    p.push_str("))");
    if costs {
        p.push_str(" (:metric minimize (total-cost))");
    }
    p.push(')');
    (d, p)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn random_tasks_round_trip(seed in any::<u64>()) {
        let (d, p) = random_task(&mut rng(seed));
        let doc = match parse_pddl(&d, &p) {
            Ok(doc) => doc,
            Err(e) => return Err(TestCaseError::fail(format!("{e}\n{d}\n{p}"))),
        };
        prop_assert_eq!(reparse(&doc), doc.clone());
        assert_vocabulary_covered(&doc);
        let g = build_asg(&to_abstract_structure(&doc), &AsgOptions::default()).unwrap();
        prop_assert!(assert_acyclic(&g).is_ok());
    }

    #[test]
    fn mutated_fixtures_never_panic(seed in any::<u64>(), which in 0usize..2) {
        let mut r = rng(seed);
        let (d, p) = PDDL_FIXTURES[which];
        let (mut domain, mut problem) = (fixture(d), fixture(p));
        let pieces = ["(", ")", "?", "-", ":", ";", "and", "not", "either", "12", "x", " ", "\n", "="];
        for _ in 0..r.gen_range(1..6) {
            let target = if r.gen_bool(0.5) { &mut domain } else { &mut problem };
            let at = r.gen_range(0..=target.len());
            if r.gen_bool(0.5) && at < target.len() {
                target.remove(at);
            } else {
                target.insert_str(at, pieces.choose(&mut r).unwrap());
            }
        }
        let _ = parse_pddl(&domain, &problem);
    }
}

#[test]
fn lowering_shape_of_an_operator() {
    let doc = parse_pddl(
        "(define (domain t) (:predicates (p ?x)) (:action a :parameters (?x) :precondition (p ?x) :effect (not (p ?x))))",
        "(define (problem q) (:domain t) (:objects o) (:init) (:goal (and)))",
    )
    .unwrap();
    let var = |n: &str| AbstractStructure::symbol(n, SymbolType::Variable);
    let pred = |n: &str| AbstractStructure::symbol(n, SymbolType::Predicate);
    let atom = AbstractStructure::tuple([pred("p"), var("?x")]);
    let expected = AbstractStructure::tuple([
        AbstractStructure::tuple([AbstractStructure::tuple([var("?x"), pred("object")])]),
        AbstractStructure::set([atom.clone()]),
        AbstractStructure::set([AbstractStructure::tuple([
            AbstractStructure::tuple([]),
            AbstractStructure::set([]),
            AbstractStructure::tuple([atom]),
        ])]),
        AbstractStructure::tuple([]),
    ]);
    let root = to_abstract_structure(&doc);
    assert_eq!(root.children()[0], AbstractStructure::set([expected]));
}
