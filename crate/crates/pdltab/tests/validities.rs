//! Known-valid and known-satisfiable PDL shapes, pinned. A validity is
//! checked by refuting its negation; each test also keeps a nearby
//! satisfiable variant to guard against over-refutation.

use pdltab::decision::check_sat;
use pdltab::graph::SolveConfig;
use pdltab::syntax::{negate_nnf, parse_formula, to_nnf, Formula};

fn unsat(texts: &[&str]) {
    let x: Vec<Formula> = texts
        .iter()
        .map(|t| to_nnf(&parse_formula(t).unwrap()))
        .collect();
    let (verdict, _) = check_sat(&x, &[], &SolveConfig::default()).unwrap();
    assert!(!verdict.satisfiable, "expected UNSAT: {texts:?}");
}

fn sat(texts: &[&str]) {
    let x: Vec<Formula> = texts
        .iter()
        .map(|t| to_nnf(&parse_formula(t).unwrap()))
        .collect();
    let (verdict, _) = check_sat(&x, &[], &SolveConfig::default()).unwrap();
    assert!(verdict.satisfiable, "expected SAT: {texts:?}");
}

fn valid(text: &str) {
    let f = to_nnf(&parse_formula(text).unwrap());
    let neg = negate_nnf(&f);
    let (verdict, _) = check_sat(&[neg], &[], &SolveConfig::default()).unwrap();
    assert!(!verdict.satisfiable, "expected `{text}` to be valid");
}

#[test]
fn star_induction() {
    // the induction principle: from p and invariance along s, p holds on
    // every s*-path
    valid("p & [s*](p -> [s]p) -> [s*]p");
    // dropping the invariance premise breaks it
    sat(&["p", "<s*>~p"]);
    // as does weakening the invariant to a single step
    sat(&["p", "[s](p -> [s]p)", "<s*>~p"]);
}

#[test]
fn star_fixpoint_unfolding() {
    valid("<s*>p -> p | <s><s*>p");
    valid("p | <s><s*>p -> <s*>p");
    valid("[s*]p -> p & [s][s*]p");
    valid("p & [s][s*]p -> [s*]p");
}

#[test]
fn star_idempotence_and_nesting() {
    valid("<(s*)*>p -> <s*>p");
    valid("<s*>p -> <(s*)*>p");
    valid("<s*><s*>p -> <s*>p");
    sat(&["<s*>p", "[s]~p"]); // realized at the start or after two steps
    sat(&["<s*>p", "~p"]);
}

#[test]
fn sequencing_and_choice() {
    valid("<s;t>p -> <s><t>p");
    valid("<s><t>p -> <s;t>p");
    valid("<s + t>p -> <s>p | <t>p");
    valid("<s>p | <t>p -> <s + t>p");
    valid("[s + t]p -> [s]p & [t]p");
    valid("<s;(t + u)>p -> <s;t>p | <s;u>p");
}

#[test]
fn tests_as_guards() {
    valid("<q?>p -> q & p");
    valid("q & p -> <q?>p");
    valid("[q?]p -> (q -> p)");
    valid("(q -> p) -> [q?]p");
    // a guarded loop: skipping requires the guard to fail eventually
    valid("<(q?;s)*>(~q) -> <s*>~q");
    sat(&["[(q?;s)*]q", "q"]); // staying inside the guard forever is fine
}

#[test]
fn modal_k_and_duality() {
    valid("[s](p -> q) -> ([s]p -> [s]q)");
    valid("<s>p -> ~[s]~p");
    valid("~[s]~p -> <s>p");
    sat(&["[s]false"]); // no successors at all
    unsat(&["<s>false"]);
}

#[test]
fn global_assumptions_interact_with_star() {
    // an assumption can make an eventuality unrealizable only together with
    // the right local constraints
    let gamma = [to_nnf(&parse_formula("p -> [s]p").unwrap())];
    let x = [to_nnf(&parse_formula("p & <s*>~p").unwrap())];
    let (verdict, _) = check_sat(&x, &gamma, &SolveConfig::default()).unwrap();
    assert!(
        !verdict.satisfiable,
        "persistence plus escape is contradictory"
    );

    let x = [to_nnf(&parse_formula("~p & <s*>p").unwrap())];
    let (verdict, _) = check_sat(&x, &gamma, &SolveConfig::default()).unwrap();
    assert!(verdict.satisfiable, "reaching p is allowed");
}
