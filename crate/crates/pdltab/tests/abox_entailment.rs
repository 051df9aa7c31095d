//! Hand-checked ABox consistency and entailment cases: box propagation along
//! asserted roles, star unfolding on individuals, and the interaction of the
//! two instance-check encodings with nontrivial TBoxes.

use pdltab::decision::{check_abox_sat, check_abox_sat_backtracking, instance_check, Encoding};
use pdltab::graph::SolveConfig;
use pdltab::syntax::{parse_assertion, parse_formula, to_nnf, Assertion, Formula, Ident};

fn abox(texts: &[&str]) -> Vec<Assertion> {
    texts
        .iter()
        .map(|t| match parse_assertion(t).unwrap() {
            Assertion::Concept(v, f) => Assertion::Concept(v, to_nnf(&f)),
            role => role,
        })
        .collect()
}

fn tbox(texts: &[&str]) -> Vec<Formula> {
    texts
        .iter()
        .map(|t| to_nnf(&parse_formula(t).unwrap()))
        .collect()
}

fn entails(a: &[Assertion], gamma: &[Formula], phi: &str, var: &str) -> bool {
    let phi = parse_formula(phi).unwrap();
    let var = Ident::new(var);
    let cfg = SolveConfig::default();
    let (direct, _) = instance_check(a, gamma, &phi, &var, Encoding::Direct, &cfg).unwrap();
    let (fresh, _) = instance_check(a, gamma, &phi, &var, Encoding::FreshProp, &cfg).unwrap();
    assert_eq!(direct, fresh, "encodings disagree on {phi}({var})");
    direct
}

fn consistent(a: &[Assertion], gamma: &[Formula]) -> bool {
    let cfg = SolveConfig::default();
    let (cached, _) = check_abox_sat(a, gamma, &cfg).unwrap();
    let (bt, _) = check_abox_sat_backtracking(a, gamma, &cfg).unwrap();
    assert_eq!(cached.satisfiable, bt.satisfiable);
    cached.satisfiable
}

#[test]
fn boxes_propagate_along_role_chains() {
    let a = abox(&["s(a,b)", "s(b,c)", "a : [s][s]p"]);
    assert!(entails(&a, &[], "p", "c"));
    assert!(!entails(&a, &[], "p", "b"), "one step is not two");
    assert!(!entails(&a, &[], "p", "a"));
}

#[test]
fn star_boxes_cover_every_reachable_individual() {
    let a = abox(&["s(a,b)", "s(b,c)", "a : [s*]p"]);
    for var in ["a", "b", "c"] {
        assert!(entails(&a, &[], "p", var), "{var}");
    }
    // unreached individuals stay unconstrained
    let a = abox(&["s(a,b)", "t(b,c)", "a : [s*]p"]);
    assert!(!entails(&a, &[], "p", "c"));
}

#[test]
fn self_loops_make_stars_reflexive_and_transitive() {
    let a = abox(&["s(a,a)", "a : [s*]p"]);
    assert!(entails(&a, &[], "p", "a"));
    let a = abox(&["s(a,a)", "a : <s>p"]);
    assert!(consistent(&a, &[]));
}

#[test]
fn diamond_assertions_do_not_pin_named_successors() {
    // a required s-successor can be anonymous, so nothing follows about b
    let a = abox(&["s(a,b)", "a : <s>p"]);
    assert!(!entails(&a, &[], "p", "b"));
    assert!(consistent(&abox(&["s(a,b)", "a : <s>p", "b : ~p"]), &[]));
}

#[test]
fn union_and_test_programs_on_individuals() {
    let a = abox(&["a : [s + t]p", "s(a,b)", "t(a,c)"]);
    assert!(entails(&a, &[], "p", "b"));
    assert!(entails(&a, &[], "p", "c"));

    let a = abox(&["a : [(q?);s]p", "a : q", "s(a,b)"]);
    assert!(entails(&a, &[], "p", "b"), "guard holds, so the box fires");
    let a = abox(&["a : [(q?);s]p", "a : ~q", "s(a,b)"]);
    assert!(!entails(&a, &[], "p", "b"), "failed guard defuses the box");
}

#[test]
fn tbox_assumptions_constrain_every_individual() {
    let gamma = tbox(&["p -> [s]p"]);
    let a = abox(&["a : p", "s(a,b)", "s(b,c)"]);
    assert!(
        entails(&a, &gamma, "p", "c"),
        "persistence propagates along the chain"
    );
    assert!(consistent(&a, &gamma));
    let contradictory = abox(&["a : p", "s(a,b)", "s(b,c)", "c : ~p"]);
    assert!(!consistent(&contradictory, &gamma));
}

#[test]
fn entailment_is_classical() {
    let a = abox(&["a : p | q", "a : ~p"]);
    assert!(entails(&a, &[], "q", "a"), "disjunctive syllogism");
    assert!(!entails(&abox(&["a : p | q"]), &[], "q", "a"));
    // tautologies are entailed about anyone, even unmentioned individuals
    assert!(entails(&abox(&["a : p"]), &[], "q | ~q", "b"));
}
