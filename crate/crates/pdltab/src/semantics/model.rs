//! Kripke models over numbered states, with exact relational semantics for
//! programs (iterated-squaring transitive closure) and a recursive model
//! checker covering the full syntax, implication and nested negation
//! included.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::syntax::{Assertion, Formula, FormulaNode, Ident, ParseError, Program, ProgramNode};

pub type State = usize;
type Relation = BTreeSet<(State, State)>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KripkeModel {
    pub num_states: usize,
    /// Interpretation of each proposition: the states where it holds.
    pub props: BTreeMap<Ident, BTreeSet<State>>,
    /// Interpretation of each atomic program.
    pub rels: BTreeMap<Ident, Relation>,
    /// Interpretation of state variables.
    pub vars: BTreeMap<Ident, State>,
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum ModelError {
    #[error("state variable `{0}` has no assigned state")]
    MissingVariable(Ident),
}

impl KripkeModel {
    pub fn new(num_states: usize) -> KripkeModel {
        KripkeModel {
            num_states,
            props: BTreeMap::new(),
            rels: BTreeMap::new(),
            vars: BTreeMap::new(),
        }
    }

    fn holds_prop(&self, name: &Ident, state: State) -> bool {
        self.props.get(name).is_some_and(|set| set.contains(&state))
    }

    fn relation(&self, name: &Ident) -> Relation {
        self.rels.get(name).cloned().unwrap_or_default()
    }

    fn check_states(&self) -> bool {
        self.props.values().flatten().all(|&s| s < self.num_states)
            && self
                .rels
                .values()
                .flatten()
                .all(|&(x, y)| x < self.num_states && y < self.num_states)
            && self.vars.values().all(|&s| s < self.num_states)
    }
}

fn compose(a: &Relation, b: &Relation) -> Relation {
    let mut out = Relation::new();
    for &(x, y) in a {
        for &(y2, z) in b.range((y, 0)..=(y, usize::MAX)) {
            debug_assert_eq!(y, y2);
            out.insert((x, z));
        }
    }
    out
}

// Reflexive-transitive closure by iterated squaring of the boolean adjacency
// matrix; exact, no tolerance.
fn star(rel: &Relation, n: usize) -> Relation {
    let mut mat = vec![false; n * n];
    for s in 0..n {
        mat[s * n + s] = true;
    }
    for &(x, y) in rel {
        mat[x * n + y] = true;
    }
    loop {
        let mut next = mat.clone();
        for x in 0..n {
            for z in 0..n {
                if !next[x * n + z] {
                    next[x * n + z] = (0..n).any(|y| mat[x * n + y] && mat[y * n + z]);
                }
            }
        }
        if next == mat {
            break;
        }
        mat = next;
    }
    let mut out = Relation::new();
    for x in 0..n {
        for y in 0..n {
            if mat[x * n + y] {
                out.insert((x, y));
            }
        }
    }
    out
}

/// The binary relation a program denotes in `m`.
pub fn eval_program(m: &KripkeModel, alpha: &Program) -> Relation {
    match alpha.node() {
        ProgramNode::Atomic(name) => m.relation(name),
        ProgramNode::Seq(l, r) => compose(&eval_program(m, l), &eval_program(m, r)),
        ProgramNode::Union(l, r) => eval_program(m, l)
            .union(&eval_program(m, r))
            .copied()
            .collect(),
        ProgramNode::Star(body) => star(&eval_program(m, body), m.num_states),
        ProgramNode::Test(cond) => (0..m.num_states)
            .filter(|&s| model_check(m, s, cond))
            .map(|s| (s, s))
            .collect(),
    }
}

/// The set of states where a formula holds.
pub fn eval_formula(m: &KripkeModel, phi: &Formula) -> BTreeSet<State> {
    match phi.node() {
        FormulaNode::Top => (0..m.num_states).collect(),
        FormulaNode::Bottom => BTreeSet::new(),
        FormulaNode::Prop(name) => (0..m.num_states)
            .filter(|&s| m.holds_prop(name, s))
            .collect(),
        FormulaNode::Not(body) => {
            let inner = eval_formula(m, body);
            (0..m.num_states).filter(|s| !inner.contains(s)).collect()
        }
        FormulaNode::And(l, r) => eval_formula(m, l)
            .intersection(&eval_formula(m, r))
            .copied()
            .collect(),
        FormulaNode::Or(l, r) => eval_formula(m, l)
            .union(&eval_formula(m, r))
            .copied()
            .collect(),
        FormulaNode::Implies(l, r) => {
            let lv = eval_formula(m, l);
            let rv = eval_formula(m, r);
            (0..m.num_states)
                .filter(|s| !lv.contains(s) || rv.contains(s))
                .collect()
        }
        FormulaNode::Diamond(p, body) => {
            let rel = eval_program(m, p);
            let target = eval_formula(m, body);
            (0..m.num_states)
                .filter(|&x| {
                    rel.range((x, 0)..=(x, usize::MAX))
                        .any(|(_, y)| target.contains(y))
                })
                .collect()
        }
        FormulaNode::Box(p, body) => {
            let rel = eval_program(m, p);
            let target = eval_formula(m, body);
            (0..m.num_states)
                .filter(|&x| {
                    rel.range((x, 0)..=(x, usize::MAX))
                        .all(|(_, y)| target.contains(y))
                })
                .collect()
        }
    }
}

/// Does `phi` hold at state `w`?
pub fn model_check(m: &KripkeModel, w: State, phi: &Formula) -> bool {
    assert!(w < m.num_states, "state {w} out of range");
    debug_assert!(m.check_states());
    eval_formula(m, phi).contains(&w)
}

/// Does the model validate all of `gamma` (hold at every state)?
pub fn validates(m: &KripkeModel, gamma: &[Formula]) -> bool {
    gamma
        .iter()
        .all(|g| eval_formula(m, g).len() == m.num_states)
}

/// Does the model satisfy every assertion of the ABox?
pub fn satisfies_abox(m: &KripkeModel, a: &[Assertion]) -> Result<bool, ModelError> {
    for assertion in a {
        match assertion {
            Assertion::Concept(var, f) => {
                let &state = m
                    .vars
                    .get(var)
                    .ok_or_else(|| ModelError::MissingVariable(var.clone()))?;
                if !model_check(m, state, f) {
                    return Ok(false);
                }
            }
            Assertion::Role(prog, from, to) => {
                let &x = m
                    .vars
                    .get(from)
                    .ok_or_else(|| ModelError::MissingVariable(from.clone()))?;
                let &y = m
                    .vars
                    .get(to)
                    .ok_or_else(|| ModelError::MissingVariable(to.clone()))?;
                if !m.relation(prog).contains(&(x, y)) {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

// Line-based text format: `states: n`, then `prop p: i j`, `rel s: (i,j)`,
// `var a = i` lines in sorted order. Round-trips exactly.
impl fmt::Display for KripkeModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "states: {}", self.num_states)?;
        for (name, states) in &self.props {
            let list: Vec<String> = states.iter().map(|s| s.to_string()).collect();
            writeln!(
                f,
                "prop {name}:{}{}",
                if list.is_empty() { "" } else { " " },
                list.join(" ")
            )?;
        }
        for (name, rel) in &self.rels {
            let list: Vec<String> = rel.iter().map(|(x, y)| format!("({x},{y})")).collect();
            writeln!(
                f,
                "rel {name}:{}{}",
                if list.is_empty() { "" } else { " " },
                list.join(" ")
            )?;
        }
        for (name, state) in &self.vars {
            writeln!(f, "var {name} = {state}")?;
        }
        Ok(())
    }
}

/// Parse the text format produced by [`KripkeModel`]'s `Display`.
pub fn parse_model(text: &str) -> Result<KripkeModel, ParseError> {
    let mut model: Option<KripkeModel> = None;
    for (lineno, raw) in text.lines().enumerate() {
        let err = |message: String| ParseError {
            line: lineno + 1,
            col: 1,
            message,
        };
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(rest) = line.strip_prefix("states:") {
            let n = rest
                .trim()
                .parse::<usize>()
                .map_err(|_| err(format!("bad state count `{}`", rest.trim())))?;
            model = Some(KripkeModel::new(n));
            continue;
        }
        let m = model
            .as_mut()
            .ok_or_else(|| err("`states:` line must come first".into()))?;
        if let Some(rest) = line.strip_prefix("prop ") {
            let (name, items) = rest
                .split_once(':')
                .ok_or_else(|| err("missing `:` in prop line".into()))?;
            let mut set = BTreeSet::new();
            for tok in items.split_whitespace() {
                set.insert(
                    tok.parse::<usize>()
                        .map_err(|_| err(format!("bad state `{tok}`")))?,
                );
            }
            m.props.insert(Ident::new(name.trim()), set);
        } else if let Some(rest) = line.strip_prefix("rel ") {
            let (name, items) = rest
                .split_once(':')
                .ok_or_else(|| err("missing `:` in rel line".into()))?;
            let mut rel = Relation::new();
            for tok in items.split_whitespace() {
                let pair = tok
                    .strip_prefix('(')
                    .and_then(|t| t.strip_suffix(')'))
                    .and_then(|t| t.split_once(','))
                    .ok_or_else(|| err(format!("bad pair `{tok}`")))?;
                let x = pair
                    .0
                    .parse::<usize>()
                    .map_err(|_| err(format!("bad pair `{tok}`")))?;
                let y = pair
                    .1
                    .parse::<usize>()
                    .map_err(|_| err(format!("bad pair `{tok}`")))?;
                rel.insert((x, y));
            }
            m.rels.insert(Ident::new(name.trim()), rel);
        } else if let Some(rest) = line.strip_prefix("var ") {
            let (name, state) = rest
                .split_once('=')
                .ok_or_else(|| err("missing `=` in var line".into()))?;
            let s = state
                .trim()
                .parse::<usize>()
                .map_err(|_| err(format!("bad state `{}`", state.trim())))?;
            m.vars.insert(Ident::new(name.trim()), s);
        } else {
            return Err(err(format!("unrecognised line `{line}`")));
        }
    }
    model.ok_or(ParseError {
        line: 1,
        col: 1,
        message: "empty model".into(),
    })
}
