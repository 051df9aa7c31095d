//! Seeded generators shared by the integration suites. Everything is
//! deterministic: a fixed seed yields a fixed problem corpus.

#![allow(dead_code)]

use rand::prelude::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use pdltab::semantics::KripkeModel;
use pdltab::syntax::{to_nnf, Assertion, Formula, Ident, Program};

pub const PROPS: [&str; 2] = ["p", "q"];
pub const PROG: &str = "s";
pub const VARS: [&str; 2] = ["a", "b"];

pub struct Gen {
    pub rng: ChaCha8Rng,
}

impl Gen {
    pub fn new(seed: u64) -> Gen {
        Gen {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn prop(&mut self) -> Formula {
        Formula::prop(*PROPS.choose(&mut self.rng).unwrap())
    }

    /// A formula in the full syntax (negation anywhere, implication allowed).
    pub fn formula(&mut self, depth: usize) -> Formula {
        if depth == 0 {
            return match self.rng.random_range(0..8) {
                0 => Formula::top(),
                1 => Formula::bottom(),
                _ => self.prop(),
            };
        }
        match self.rng.random_range(0..10) {
            0 => self.prop(),
            1 => Formula::not(self.formula(depth - 1)),
            2 | 3 => Formula::and(self.formula(depth - 1), self.formula(depth - 1)),
            4 | 5 => Formula::or(self.formula(depth - 1), self.formula(depth - 1)),
            6 => Formula::implies(self.formula(depth - 1), self.formula(depth - 1)),
            7 | 8 => Formula::diamond(self.program(2), self.formula(depth - 1)),
            _ => Formula::boxed(self.program(2), self.formula(depth - 1)),
        }
    }

    pub fn program(&mut self, depth: usize) -> Program {
        if depth == 0 {
            return Program::atomic(PROG);
        }
        match self.rng.random_range(0..8) {
            0..=2 => Program::atomic(PROG),
            3 => Program::seq(self.program(depth - 1), self.program(depth - 1)),
            4 => Program::union(self.program(depth - 1), self.program(depth - 1)),
            5 | 6 => Program::star(self.program(depth - 1)),
            _ => Program::test(self.formula(1)),
        }
    }

    pub fn nnf_formula(&mut self, depth: usize) -> Formula {
        to_nnf(&self.formula(depth))
    }

    /// A formula problem within the suite bounds: one or two goal formulas of
    /// depth at most 4, at most one assumption.
    pub fn formula_problem(&mut self) -> (Vec<Formula>, Vec<Formula>) {
        let goals = (0..self.rng.random_range(1..=2))
            .map(|_| self.nnf_formula(4))
            .collect();
        let gamma = if self.rng.random_bool(0.5) {
            vec![self.nnf_formula(2)]
        } else {
            vec![]
        };
        (goals, gamma)
    }

    pub fn var(&mut self) -> Ident {
        Ident::new(VARS.choose(&mut self.rng).unwrap())
    }

    /// An ABox problem over two state variables.
    pub fn abox_problem(&mut self) -> (Vec<Assertion>, Vec<Formula>) {
        let count = self.rng.random_range(1..=3);
        let mut abox: Vec<Assertion> = (0..count)
            .map(|_| {
                if self.rng.random_bool(0.3) {
                    Assertion::Role(Ident::new(PROG), self.var(), self.var())
                } else {
                    Assertion::Concept(self.var(), self.nnf_formula(3))
                }
            })
            .collect();
        if abox.iter().all(|a| matches!(a, Assertion::Role(..))) {
            abox.push(Assertion::Concept(self.var(), self.nnf_formula(2)));
        }
        let gamma = if self.rng.random_bool(0.4) {
            vec![self.nnf_formula(2)]
        } else {
            vec![]
        };
        (abox, gamma)
    }

    /// A random model with at most `max_states` states over `p`, `q`, `s`,
    /// with both suite variables assigned.
    pub fn model(&mut self, max_states: usize) -> KripkeModel {
        let n = self.rng.random_range(1..=max_states);
        let mut m = KripkeModel::new(n);
        for name in PROPS {
            let states = (0..n).filter(|_| self.rng.random_bool(0.5)).collect();
            m.props.insert(Ident::new(name), states);
        }
        let mut rel = std::collections::BTreeSet::new();
        for x in 0..n {
            for y in 0..n {
                if self.rng.random_bool(0.4) {
                    rel.insert((x, y));
                }
            }
        }
        m.rels.insert(Ident::new(PROG), rel);
        for name in VARS {
            m.vars.insert(Ident::new(name), self.rng.random_range(0..n));
        }
        m
    }
}
