//! Bounded brute-force satisfiability: exhaustively enumerate every Kripke
//! model up to a small state count over a fixed signature, looking for one
//! that validates the assumptions and satisfies the input. Independent of
//! the tableau machinery, so the two can check each other.
//!
//! Models are enumerated in a packed form: a proposition's interpretation is
//! a bitmask over states, an atomic program's one mask per source state.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::syntax::{Assertion, Formula, FormulaNode, Ident, Program, ProgramNode};
use crate::ProblemInput;

pub const MAX_ORACLE_STATES: usize = 4;

// Keeps full enumeration around a few hundred thousand models.
const MAX_ENUM_BITS: u32 = 26;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("state budget {0} exceeds the supported maximum of {MAX_ORACLE_STATES}")]
    StateBudget(usize),
    #[error("signature too large to enumerate ({bits} bits of model choices)")]
    SignatureOverflow { bits: u32 },
}

/// The vocabulary enumeration ranges over.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Signature {
    pub props: Vec<Ident>,
    pub progs: Vec<Ident>,
    pub vars: Vec<Ident>,
}

impl Signature {
    /// The symbols occurring in a problem and its global assumptions.
    pub fn from_problem(input: &ProblemInput, gamma: &[Formula]) -> Signature {
        let mut props = BTreeSet::new();
        let mut progs = BTreeSet::new();
        let mut vars = BTreeSet::new();
        let mut walk_formula = WalkCtx {
            props: &mut props,
            progs: &mut progs,
        };
        match input {
            ProblemInput::Formulas(fs) => {
                for f in fs {
                    walk_formula.formula(f);
                }
            }
            ProblemInput::Abox(a) => {
                for assertion in a {
                    match assertion {
                        Assertion::Concept(v, f) => {
                            vars.insert(v.clone());
                            walk_formula.formula(f);
                        }
                        Assertion::Role(p, x, y) => {
                            walk_formula.progs.insert(p.clone());
                            vars.insert(x.clone());
                            vars.insert(y.clone());
                        }
                    }
                }
            }
        }
        for g in gamma {
            walk_formula.formula(g);
        }
        Signature {
            props: props.into_iter().collect(),
            progs: progs.into_iter().collect(),
            vars: vars.into_iter().collect(),
        }
    }
}

struct WalkCtx<'a> {
    props: &'a mut BTreeSet<Ident>,
    progs: &'a mut BTreeSet<Ident>,
}

impl WalkCtx<'_> {
    fn formula(&mut self, f: &Formula) {
        match f.node() {
            FormulaNode::Top | FormulaNode::Bottom => {}
            FormulaNode::Prop(name) => {
                self.props.insert(name.clone());
            }
            FormulaNode::Not(body) => self.formula(body),
            FormulaNode::And(l, r) | FormulaNode::Or(l, r) | FormulaNode::Implies(l, r) => {
                self.formula(l);
                self.formula(r);
            }
            FormulaNode::Diamond(p, body) | FormulaNode::Box(p, body) => {
                self.program(p);
                self.formula(body);
            }
        }
    }

    fn program(&mut self, p: &Program) {
        match p.node() {
            ProgramNode::Atomic(name) => {
                self.progs.insert(name.clone());
            }
            ProgramNode::Seq(l, r) | ProgramNode::Union(l, r) => {
                self.program(l);
                self.program(r);
            }
            ProgramNode::Star(body) => self.program(body),
            ProgramNode::Test(cond) => self.formula(cond),
        }
    }
}

// Compiled formula over signature indices, evaluated on packed models.
enum Compiled {
    Top,
    Bottom,
    Prop(usize),
    UnknownProp,
    Not(Box<Compiled>),
    And(Box<Compiled>, Box<Compiled>),
    Or(Box<Compiled>, Box<Compiled>),
    Implies(Box<Compiled>, Box<Compiled>),
    Diamond(CompiledProg, Box<Compiled>),
    Box(CompiledProg, Box<Compiled>),
}

enum CompiledProg {
    Atomic(usize),
    UnknownProg,
    Seq(Box<CompiledProg>, Box<CompiledProg>),
    Union(Box<CompiledProg>, Box<CompiledProg>),
    Star(Box<CompiledProg>),
    Test(Box<Compiled>),
}

fn compile(f: &Formula, sig: &Signature) -> Compiled {
    match f.node() {
        FormulaNode::Top => Compiled::Top,
        FormulaNode::Bottom => Compiled::Bottom,
        FormulaNode::Prop(name) => match sig.props.iter().position(|p| p == name) {
            Some(i) => Compiled::Prop(i),
            None => Compiled::UnknownProp,
        },
        FormulaNode::Not(body) => Compiled::Not(Box::new(compile(body, sig))),
        FormulaNode::And(l, r) => {
            Compiled::And(Box::new(compile(l, sig)), Box::new(compile(r, sig)))
        }
        FormulaNode::Or(l, r) => Compiled::Or(Box::new(compile(l, sig)), Box::new(compile(r, sig))),
        FormulaNode::Implies(l, r) => {
            Compiled::Implies(Box::new(compile(l, sig)), Box::new(compile(r, sig)))
        }
        FormulaNode::Diamond(p, body) => {
            Compiled::Diamond(compile_prog(p, sig), Box::new(compile(body, sig)))
        }
        FormulaNode::Box(p, body) => {
            Compiled::Box(compile_prog(p, sig), Box::new(compile(body, sig)))
        }
    }
}

fn compile_prog(p: &Program, sig: &Signature) -> CompiledProg {
    match p.node() {
        ProgramNode::Atomic(name) => match sig.progs.iter().position(|q| q == name) {
            Some(i) => CompiledProg::Atomic(i),
            None => CompiledProg::UnknownProg,
        },
        ProgramNode::Seq(l, r) => CompiledProg::Seq(
            Box::new(compile_prog(l, sig)),
            Box::new(compile_prog(r, sig)),
        ),
        ProgramNode::Union(l, r) => CompiledProg::Union(
            Box::new(compile_prog(l, sig)),
            Box::new(compile_prog(r, sig)),
        ),
        ProgramNode::Star(body) => CompiledProg::Star(Box::new(compile_prog(body, sig))),
        ProgramNode::Test(cond) => CompiledProg::Test(Box::new(compile(cond, sig))),
    }
}

/// One packed candidate model: `n` states, one mask per proposition, one
/// row-mask array per program.
struct Packed<'a> {
    n: usize,
    props: &'a [u8],
    rels: &'a [[u8; MAX_ORACLE_STATES]],
}

// index loops mirror the row-mask representation
#[allow(clippy::needless_range_loop)]
impl Packed<'_> {
    fn full(&self) -> u8 {
        ((1u16 << self.n) - 1) as u8
    }

    fn eval(&self, f: &Compiled) -> u8 {
        match f {
            Compiled::Top => self.full(),
            Compiled::Bottom | Compiled::UnknownProp => 0,
            Compiled::Prop(i) => self.props[*i],
            Compiled::Not(body) => !self.eval(body) & self.full(),
            Compiled::And(l, r) => self.eval(l) & self.eval(r),
            Compiled::Or(l, r) => self.eval(l) | self.eval(r),
            Compiled::Implies(l, r) => (!self.eval(l) & self.full()) | self.eval(r),
            Compiled::Diamond(p, body) => {
                let rows = self.eval_prog(p);
                let target = self.eval(body);
                let mut out = 0u8;
                for x in 0..self.n {
                    if rows[x] & target != 0 {
                        out |= 1 << x;
                    }
                }
                out
            }
            Compiled::Box(p, body) => {
                let rows = self.eval_prog(p);
                let target = self.eval(body);
                let mut out = 0u8;
                for x in 0..self.n {
                    if rows[x] & !target & self.full() == 0 {
                        out |= 1 << x;
                    }
                }
                out
            }
        }
    }

    fn eval_prog(&self, p: &CompiledProg) -> [u8; MAX_ORACLE_STATES] {
        let mut out = [0u8; MAX_ORACLE_STATES];
        match p {
            CompiledProg::Atomic(i) => {
                out.copy_from_slice(&self.rels[*i]);
            }
            CompiledProg::UnknownProg => {}
            CompiledProg::Seq(l, r) => {
                let a = self.eval_prog(l);
                let b = self.eval_prog(r);
                for x in 0..self.n {
                    for y in 0..self.n {
                        if a[x] & (1 << y) != 0 {
                            out[x] |= b[y];
                        }
                    }
                }
            }
            CompiledProg::Union(l, r) => {
                let a = self.eval_prog(l);
                let b = self.eval_prog(r);
                for x in 0..self.n {
                    out[x] = a[x] | b[x];
                }
            }
            CompiledProg::Star(body) => {
                let a = self.eval_prog(body);
                for (x, row) in out.iter_mut().enumerate().take(self.n) {
                    *row = a[x] | (1 << x);
                }
                loop {
                    let mut next = out;
                    for x in 0..self.n {
                        for y in 0..self.n {
                            if out[x] & (1 << y) != 0 {
                                next[x] |= out[y];
                            }
                        }
                    }
                    if next == out {
                        break;
                    }
                    out = next;
                }
            }
            CompiledProg::Test(cond) => {
                let set = self.eval(cond);
                for x in 0..self.n {
                    if set & (1 << x) != 0 {
                        out[x] = 1 << x;
                    }
                }
            }
        }
        out
    }
}

/// Is there a Kripke model over `sig` with at most `max_states` states that
/// validates `gamma` and satisfies the input (a formula set at some state, or
/// an ABox under some variable assignment)? Exhaustive, so a `false` answer
/// rules out only models within the budget.
pub fn bounded_model_sat(
    input: &ProblemInput,
    gamma: &[Formula],
    max_states: usize,
    sig: &Signature,
) -> Result<bool, OracleError> {
    if max_states == 0 || max_states > MAX_ORACLE_STATES {
        return Err(OracleError::StateBudget(max_states));
    }
    let n_max = max_states;
    let bits = (sig.props.len() * n_max + sig.progs.len() * n_max * n_max) as u32;
    if bits > MAX_ENUM_BITS {
        return Err(OracleError::SignatureOverflow { bits });
    }

    let gamma_c: Vec<Compiled> = gamma.iter().map(|g| compile(g, sig)).collect();
    enum Goal {
        Formulas(Vec<Compiled>),
        Abox(Vec<CompiledAssertion>),
    }
    enum CompiledAssertion {
        Concept(usize, Compiled),
        Role(Option<usize>, usize, usize),
    }
    let goal = match input {
        ProblemInput::Formulas(fs) => Goal::Formulas(fs.iter().map(|f| compile(f, sig)).collect()),
        ProblemInput::Abox(a) => Goal::Abox(
            a.iter()
                .map(|assertion| match assertion {
                    Assertion::Concept(v, f) => CompiledAssertion::Concept(
                        sig.vars
                            .iter()
                            .position(|x| x == v)
                            .expect("var in signature"),
                        compile(f, sig),
                    ),
                    Assertion::Role(p, x, y) => CompiledAssertion::Role(
                        sig.progs.iter().position(|q| q == p),
                        sig.vars
                            .iter()
                            .position(|v| v == x)
                            .expect("var in signature"),
                        sig.vars
                            .iter()
                            .position(|v| v == y)
                            .expect("var in signature"),
                    ),
                })
                .collect(),
        ),
    };

    #[allow(clippy::needless_range_loop)]
    for n in 1..=max_states {
        let full = ((1u16 << n) - 1) as u8;
        let prop_combos = 1u64 << (sig.props.len() * n);
        let rel_combos = 1u64 << (sig.progs.len() * n * n);
        let mut props = vec![0u8; sig.props.len()];
        let mut rels = vec![[0u8; MAX_ORACLE_STATES]; sig.progs.len()];
        for prop_bits in 0..prop_combos {
            for (i, mask) in props.iter_mut().enumerate() {
                *mask = ((prop_bits >> (i * n)) as u8) & full;
            }
            for rel_bits in 0..rel_combos {
                for (i, rows) in rels.iter_mut().enumerate() {
                    for (x, row) in rows.iter_mut().enumerate().take(n) {
                        *row = ((rel_bits >> ((i * n + x) * n)) as u8) & full;
                    }
                }
                let model = Packed {
                    n,
                    props: &props,
                    rels: &rels,
                };
                if !gamma_c.iter().all(|g| model.eval(g) == full) {
                    continue;
                }
                match &goal {
                    Goal::Formulas(fs) => {
                        let mut sat = full;
                        for f in fs {
                            sat &= model.eval(f);
                            if sat == 0 {
                                break;
                            }
                        }
                        if sat != 0 {
                            return Ok(true);
                        }
                    }
                    Goal::Abox(assertions) => {
                        // enumerate variable assignments
                        let v = sig.vars.len();
                        let mut assignment = vec![0usize; v];
                        'assign: loop {
                            let ok = assertions.iter().all(|assertion| match assertion {
                                CompiledAssertion::Concept(var, f) => {
                                    model.eval(f) & (1 << assignment[*var]) != 0
                                }
                                CompiledAssertion::Role(prog, x, y) => match prog {
                                    Some(p) => {
                                        model.rels[*p][assignment[*x]] & (1 << assignment[*y]) != 0
                                    }
                                    None => false,
                                },
                            });
                            if ok {
                                return Ok(true);
                            }
                            // next assignment in base-n counting
                            for slot in assignment.iter_mut() {
                                *slot += 1;
                                if *slot < n {
                                    continue 'assign;
                                }
                                *slot = 0;
                            }
                            break;
                        }
                    }
                }
            }
        }
    }
    Ok(false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semantics::model::{model_check, KripkeModel};
    use crate::syntax::parse_formula;

    fn sig_pq_s() -> Signature {
        Signature {
            props: vec![Ident::new("p"), Ident::new("q")],
            progs: vec![Ident::new("s")],
            vars: vec![],
        }
    }

    fn formulas(texts: &[&str]) -> ProblemInput {
        ProblemInput::Formulas(texts.iter().map(|t| parse_formula(t).unwrap()).collect())
    }

    #[test]
    fn contradiction_has_no_model() {
        assert_eq!(
            bounded_model_sat(&formulas(&["p", "~p"]), &[], 3, &sig_pq_s()),
            Ok(false)
        );
    }

    #[test]
    fn diamond_needs_only_a_self_loop() {
        assert_eq!(
            bounded_model_sat(&formulas(&["<s>p"]), &[], 1, &sig_pq_s()),
            Ok(true)
        );
    }

    #[test]
    fn star_example_has_no_small_model() {
        let gamma = [parse_formula("~p | ~q").unwrap()];
        assert_eq!(
            bounded_model_sat(&formulas(&["<s*>p", "[s*]q"]), &gamma, 3, &sig_pq_s()),
            Ok(false)
        );
    }

    #[test]
    fn budget_and_signature_guards() {
        assert_eq!(
            bounded_model_sat(&formulas(&["p"]), &[], 5, &sig_pq_s()),
            Err(OracleError::StateBudget(5))
        );
        let wide = Signature {
            props: (0..40).map(|i| Ident::new(&format!("p{i}"))).collect(),
            progs: vec![],
            vars: vec![],
        };
        assert!(matches!(
            bounded_model_sat(&formulas(&["p0"]), &[], 2, &wide),
            Err(OracleError::SignatureOverflow { .. })
        ));
    }

    #[test]
    fn coherence_in_the_state_budget() {
        let input = formulas(&["<s>(p & <s>(q & <s>~p))"]);
        let sig = sig_pq_s();
        let at2 = bounded_model_sat(&input, &[], 2, &sig).unwrap();
        let at3 = bounded_model_sat(&input, &[], 3, &sig).unwrap();
        assert!(!at2 || at3, "a model within 2 states is one within 3");
        assert!(at3);
    }

    // The packed evaluator must agree with the reference model checker.
    #[test]
    #[allow(clippy::needless_range_loop)]
    fn packed_evaluation_matches_model_check() {
        let sig = sig_pq_s();
        let texts = [
            "p",
            "~p | q",
            "<s>p",
            "[s](p -> q)",
            "<s*>q",
            "[s*]~p",
            "<(p?);s>q",
            "[s + (q?)]p",
            "<s;s>(p & ~q)",
        ];
        let compiled: Vec<Compiled> = texts
            .iter()
            .map(|t| compile(&parse_formula(t).unwrap(), &sig))
            .collect();
        let parsed: Vec<Formula> = texts.iter().map(|t| parse_formula(t).unwrap()).collect();
        let n = 3usize;
        for prop_bits in 0..(1u64 << (2 * n)) {
            if prop_bits % 7 != 0 {
                continue; // sample
            }
            for rel_bits in (0..(1u64 << (n * n))).step_by(11) {
                let props = [(prop_bits & 0b111) as u8, ((prop_bits >> n) & 0b111) as u8];
                let mut rels = [[0u8; MAX_ORACLE_STATES]];
                for x in 0..n {
                    rels[0][x] = ((rel_bits >> (x * n)) as u8) & 0b111;
                }
                let packed = Packed {
                    n,
                    props: &props,
                    rels: &rels,
                };

                let mut model = KripkeModel::new(n);
                for (i, name) in ["p", "q"].iter().enumerate() {
                    let states = (0..n).filter(|&s| props[i] & (1 << s) != 0).collect();
                    model.props.insert(Ident::new(name), states);
                }
                let mut rel = std::collections::BTreeSet::new();
                for x in 0..n {
                    for y in 0..n {
                        if rels[0][x] & (1 << y) != 0 {
                            rel.insert((x, y));
                        }
                    }
                }
                model.rels.insert(Ident::new("s"), rel);

                for (c, f) in compiled.iter().zip(&parsed) {
                    let mask = packed.eval(c);
                    for w in 0..n {
                        assert_eq!(
                            mask & (1 << w) != 0,
                            model_check(&model, w, f),
                            "{f} at {w} on props={props:?} rel={:?}",
                            rels[0]
                        );
                    }
                }
            }
        }
    }
}
