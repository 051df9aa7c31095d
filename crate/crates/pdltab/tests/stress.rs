//! Large randomized cross-validation runs, heavier than the acceptance
//! suite. Off by default; run with
//! `cargo test -p pdltab --test stress -- --ignored --nocapture`.

use std::collections::BTreeSet;

use rand::prelude::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use pdltab::decision::{check_abox_sat, check_abox_sat_backtracking, check_sat};
use pdltab::graph::SolveConfig;
use pdltab::semantics::{
    bounded_model_sat, extract_model, model_check, satisfies_abox, validates, Signature,
};
use pdltab::syntax::{parse_formula, to_nnf, Assertion, Formula, Ident, Program};
use pdltab::ProblemInput;

struct Rich {
    rng: ChaCha8Rng,
    props: Vec<&'static str>,
    progs: Vec<&'static str>,
    vars: Vec<&'static str>,
}

impl Rich {
    fn new(
        seed: u64,
        props: &[&'static str],
        progs: &[&'static str],
        vars: &[&'static str],
    ) -> Rich {
        Rich {
            rng: ChaCha8Rng::seed_from_u64(seed),
            props: props.to_vec(),
            progs: progs.to_vec(),
            vars: vars.to_vec(),
        }
    }

    fn formula(&mut self, depth: usize) -> Formula {
        if depth == 0 {
            return match self.rng.random_range(0..10) {
                0 => Formula::top(),
                1 => Formula::bottom(),
                _ => Formula::prop(*self.props.choose(&mut self.rng).unwrap()),
            };
        }
        match self.rng.random_range(0..10) {
            0 => Formula::prop(*self.props.choose(&mut self.rng).unwrap()),
            1 => Formula::not(self.formula(depth - 1)),
            2 | 3 => Formula::and(self.formula(depth - 1), self.formula(depth - 1)),
            4 | 5 => Formula::or(self.formula(depth - 1), self.formula(depth - 1)),
            6 => Formula::implies(self.formula(depth - 1), self.formula(depth - 1)),
            7 | 8 => Formula::diamond(self.program(2), self.formula(depth - 1)),
            _ => Formula::boxed(self.program(2), self.formula(depth - 1)),
        }
    }

    fn program(&mut self, depth: usize) -> Program {
        if depth == 0 {
            return Program::atomic(*self.progs.choose(&mut self.rng).unwrap());
        }
        match self.rng.random_range(0..8) {
            0..=2 => Program::atomic(*self.progs.choose(&mut self.rng).unwrap()),
            3 => Program::seq(self.program(depth - 1), self.program(depth - 1)),
            4 => Program::union(self.program(depth - 1), self.program(depth - 1)),
            5 | 6 => Program::star(self.program(depth - 1)),
            _ => Program::test(self.formula(1)),
        }
    }

    fn var(&mut self) -> Ident {
        Ident::new(self.vars.choose(&mut self.rng).unwrap())
    }

    fn abox(&mut self) -> Vec<Assertion> {
        let count = self.rng.random_range(1..=4);
        let mut abox: Vec<Assertion> = (0..count)
            .map(|_| {
                if self.rng.random_bool(0.35) {
                    Assertion::Role(
                        Ident::new(self.progs.choose(&mut self.rng).unwrap()),
                        self.var(),
                        self.var(),
                    )
                } else {
                    Assertion::Concept(self.var(), to_nnf(&self.formula(4)))
                }
            })
            .collect();
        if abox.iter().all(|a| matches!(a, Assertion::Role(..))) {
            abox.push(Assertion::Concept(self.var(), to_nnf(&self.formula(2))));
        }
        abox
    }
}

#[test]
#[ignore = "heavy randomized sweep"]
fn formula_problems_cross_validate_against_the_oracle() {
    let cfg = SolveConfig { max_nodes: 500_000 };
    let mut gen = Rich::new(0x57e5_0001, &["p", "q"], &["s"], &[]);
    let mut skipped = 0usize;
    let mut sat = 0usize;
    for round in 0..3000 {
        let x: Vec<Formula> = (0..gen.rng.random_range(1..=2))
            .map(|_| to_nnf(&gen.formula(5)))
            .collect();
        let gamma: Vec<Formula> = if gen.rng.random_bool(0.5) {
            vec![to_nnf(&gen.formula(3))]
        } else {
            vec![]
        };
        let solved = match check_sat(&x, &gamma, &cfg) {
            Ok(pair) => pair,
            Err(_) => {
                skipped += 1;
                continue;
            }
        };
        let (verdict, graph) = solved;
        let input = ProblemInput::Formulas(x.clone());
        let sig = Signature::from_problem(&input, &gamma);
        if bounded_model_sat(&input, &gamma, 3, &sig).unwrap() {
            assert!(
                verdict.satisfiable,
                "round {round}: oracle SAT, solver UNSAT on {x:?} / {gamma:?}"
            );
        }
        if let Some(marking) = &verdict.witness {
            sat += 1;
            let (_, model) = extract_model(&graph, marking, &input, &gamma).unwrap_or_else(|e| {
                panic!("round {round}: extraction failed: {e} on {x:?} / {gamma:?}")
            });
            assert!(
                validates(&model, &gamma),
                "round {round}: {x:?} / {gamma:?}"
            );
            for f in &x {
                assert!(model_check(&model, 0, f), "round {round}: goal {f} fails");
            }
        }
    }
    println!("3000 formula problems: {sat} sat, {skipped} over the node cap");
}

#[test]
#[ignore = "heavy randomized sweep"]
fn abox_problems_cross_validate_and_agree() {
    let cfg = SolveConfig { max_nodes: 500_000 };
    let mut gen = Rich::new(0x57e5_0002, &["p", "q"], &["s", "t"], &["a", "b", "c"]);
    let mut skipped = 0usize;
    let mut sat = 0usize;
    for round in 0..1500 {
        let a = gen.abox();
        let gamma: Vec<Formula> = if gen.rng.random_bool(0.4) {
            vec![to_nnf(&gen.formula(2))]
        } else {
            vec![]
        };
        let cached = match check_abox_sat(&a, &gamma, &cfg) {
            Ok(pair) => pair,
            Err(_) => {
                skipped += 1;
                continue;
            }
        };
        let (verdict, graph) = cached;
        let (bt, _) = match check_abox_sat_backtracking(&a, &gamma, &cfg) {
            Ok(pair) => pair,
            Err(_) => {
                skipped += 1;
                continue;
            }
        };
        assert_eq!(
            verdict.satisfiable, bt.satisfiable,
            "round {round}: algorithms disagree on {a:?} / {gamma:?}"
        );
        let input = ProblemInput::Abox(a.clone());
        let sig = Signature::from_problem(&input, &gamma);
        if bounded_model_sat(&input, &gamma, 2, &sig).unwrap() {
            assert!(
                verdict.satisfiable,
                "round {round}: oracle SAT, solver UNSAT on {a:?} / {gamma:?}"
            );
        }
        if let Some(marking) = &verdict.witness {
            sat += 1;
            let (_, model) = extract_model(&graph, marking, &input, &gamma).unwrap_or_else(|e| {
                panic!("round {round}: extraction failed: {e} on {a:?} / {gamma:?}")
            });
            assert!(
                validates(&model, &gamma),
                "round {round}: {a:?} / {gamma:?}"
            );
            assert_eq!(satisfies_abox(&model, &a), Ok(true), "round {round}: {a:?}");
        }
    }
    println!("1500 ABox problems: {sat} sat, {skipped} over the node cap");
}

// Slow but deeper than the three-state check: countermodel search over every
// model with up to four states.
#[test]
#[ignore = "heavy randomized sweep"]
fn four_state_oracle_agrees_with_the_solver() {
    let cfg = SolveConfig { max_nodes: 500_000 };
    let mut gen = Rich::new(0x57e5_0005, &["p", "q"], &["s"], &[]);
    let mut found = 0usize;
    for round in 0..150 {
        let x: Vec<Formula> = (0..gen.rng.random_range(1..=2))
            .map(|_| to_nnf(&gen.formula(5)))
            .collect();
        let gamma: Vec<Formula> = if gen.rng.random_bool(0.5) {
            vec![to_nnf(&gen.formula(3))]
        } else {
            vec![]
        };
        let input = ProblemInput::Formulas(x.clone());
        let sig = Signature::from_problem(&input, &gamma);
        if bounded_model_sat(&input, &gamma, 4, &sig).unwrap() {
            found += 1;
            let (verdict, _) = check_sat(&x, &gamma, &cfg).unwrap();
            assert!(
                verdict.satisfiable,
                "round {round}: 4-state model exists but solver said UNSAT on {x:?} / {gamma:?}"
            );
        }
    }
    println!("150 problems, {found} with a model within four states");
}

#[test]
#[ignore = "heavy randomized sweep"]
fn parser_never_panics_on_garbage() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x57e5_0003);
    let alphabet: Vec<char> = "pqrs abtu()<>[]~&|->;+*?:,#_01 \t\n".chars().collect();
    for _ in 0..50_000 {
        let len = rng.random_range(0..40);
        let text: String = (0..len)
            .map(|_| *alphabet.choose(&mut rng).unwrap())
            .collect();
        let _ = parse_formula(&text); // must return, never panic
        let _ = pdltab::syntax::parse_assertion(&text);
    }
}

// Printing a generated formula and reparsing it must survive depth-6 terms
// with tests nested in programs nested in tests.
#[test]
#[ignore = "heavy randomized sweep"]
fn deep_roundtrips() {
    let mut gen = Rich::new(0x57e5_0004, &["p", "q", "r"], &["s", "t"], &[]);
    let mut seen = BTreeSet::new();
    for _ in 0..20_000 {
        let f = gen.formula(6);
        let printed = f.to_string();
        let reparsed = parse_formula(&printed)
            .unwrap_or_else(|e| panic!("`{printed}` failed to reparse: {e}"));
        assert_eq!(f, reparsed, "printed as `{printed}`");
        seen.insert(printed);
    }
    assert!(seen.len() > 10_000, "generator diversity check");
}
