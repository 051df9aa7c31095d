//! Core term types. Formulas and programs are immutable trees with shared
//! subterms (`Arc`) and a structural hash precomputed at construction, so
//! that the label sets handled during graph caching hash and compare cheaply.
//!
//! All types carry a canonical total order (constructor tag first, then
//! recursive comparison) so sets of formulas have one deterministic sorted
//! representation.

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

const FNV_OFFSET: u64 = 0xcbf29ce484222325;
const FNV_PRIME: u64 = 0x100000001b3;

fn fnv_mix(state: u64, value: u64) -> u64 {
    let mut h = state;
    for byte in value.to_le_bytes() {
        h ^= byte as u64;
        h = h.wrapping_mul(FNV_PRIME);
    }
    h
}

fn fnv_str(state: u64, s: &str) -> u64 {
    let mut h = state;
    for byte in s.as_bytes() {
        h ^= *byte as u64;
        h = h.wrapping_mul(FNV_PRIME);
    }
    h
}

/// An interned identifier: proposition symbol, atomic program symbol, or
/// state variable, depending on position.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Ident(Arc<str>);

impl Ident {
    pub fn new(name: &str) -> Ident {
        Ident(Arc::from(name))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Ident {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Ident {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", &*self.0)
    }
}

impl From<&str> for Ident {
    fn from(s: &str) -> Ident {
        Ident::new(s)
    }
}

/// A regular program: atomic symbol, composition, choice, iteration, or test.
#[derive(Clone)]
pub struct Program(Arc<ProgramInner>);

struct ProgramInner {
    hash: u64,
    node: ProgramNode,
}

#[derive(Clone, PartialEq, Eq)]
pub enum ProgramNode {
    Atomic(Ident),
    Seq(Program, Program),
    Union(Program, Program),
    Star(Program),
    Test(Formula),
}

/// A PDL formula in the full syntax (implication and unrestricted negation
/// included; see [`super::is_nnf`] for the NNF sublanguage).
#[derive(Clone)]
pub struct Formula(Arc<FormulaInner>);

struct FormulaInner {
    hash: u64,
    node: FormulaNode,
}

#[derive(Clone, PartialEq, Eq)]
pub enum FormulaNode {
    Top,
    Bottom,
    Prop(Ident),
    Not(Formula),
    And(Formula, Formula),
    Or(Formula, Formula),
    Implies(Formula, Formula),
    Diamond(Program, Formula),
    Box(Program, Formula),
}

impl Program {
    fn build(node: ProgramNode) -> Program {
        let mut h = FNV_OFFSET;
        h = fnv_mix(h, 0x50);
        h = match &node {
            ProgramNode::Atomic(name) => fnv_str(fnv_mix(h, 1), name.as_str()),
            ProgramNode::Seq(l, r) => fnv_mix(fnv_mix(fnv_mix(h, 2), l.hash()), r.hash()),
            ProgramNode::Union(l, r) => fnv_mix(fnv_mix(fnv_mix(h, 3), l.hash()), r.hash()),
            ProgramNode::Star(p) => fnv_mix(fnv_mix(h, 4), p.hash()),
            ProgramNode::Test(f) => fnv_mix(fnv_mix(h, 5), f.hash()),
        };
        Program(Arc::new(ProgramInner { hash: h, node }))
    }

    pub fn atomic(name: impl Into<Ident>) -> Program {
        Program::build(ProgramNode::Atomic(name.into()))
    }

    pub fn seq(left: Program, right: Program) -> Program {
        Program::build(ProgramNode::Seq(left, right))
    }

    pub fn union(left: Program, right: Program) -> Program {
        Program::build(ProgramNode::Union(left, right))
    }

    pub fn star(body: Program) -> Program {
        Program::build(ProgramNode::Star(body))
    }

    pub fn test(condition: Formula) -> Program {
        Program::build(ProgramNode::Test(condition))
    }

    pub fn node(&self) -> &ProgramNode {
        &self.0.node
    }

    pub fn hash(&self) -> u64 {
        self.0.hash
    }

    /// Number of constructors in the tree, counting test conditions.
    pub fn len(&self) -> usize {
        match self.node() {
            ProgramNode::Atomic(_) => 1,
            ProgramNode::Seq(l, r) | ProgramNode::Union(l, r) => 1 + l.len() + r.len(),
            ProgramNode::Star(p) => 1 + p.len(),
            ProgramNode::Test(f) => 1 + f.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    fn tag(&self) -> u8 {
        match self.node() {
            ProgramNode::Atomic(_) => 0,
            ProgramNode::Seq(..) => 1,
            ProgramNode::Union(..) => 2,
            ProgramNode::Star(_) => 3,
            ProgramNode::Test(_) => 4,
        }
    }
}

impl Formula {
    fn build(node: FormulaNode) -> Formula {
        let mut h = FNV_OFFSET;
        h = fnv_mix(h, 0x46);
        h = match &node {
            FormulaNode::Top => fnv_mix(h, 1),
            FormulaNode::Bottom => fnv_mix(h, 2),
            FormulaNode::Prop(name) => fnv_str(fnv_mix(h, 3), name.as_str()),
            FormulaNode::Not(f) => fnv_mix(fnv_mix(h, 4), f.hash()),
            FormulaNode::And(l, r) => fnv_mix(fnv_mix(fnv_mix(h, 5), l.hash()), r.hash()),
            FormulaNode::Or(l, r) => fnv_mix(fnv_mix(fnv_mix(h, 6), l.hash()), r.hash()),
            FormulaNode::Implies(l, r) => fnv_mix(fnv_mix(fnv_mix(h, 7), l.hash()), r.hash()),
            FormulaNode::Diamond(p, f) => fnv_mix(fnv_mix(fnv_mix(h, 8), p.hash()), f.hash()),
            FormulaNode::Box(p, f) => fnv_mix(fnv_mix(fnv_mix(h, 9), p.hash()), f.hash()),
        };
        Formula(Arc::new(FormulaInner { hash: h, node }))
    }

    pub fn top() -> Formula {
        Formula::build(FormulaNode::Top)
    }

    pub fn bottom() -> Formula {
        Formula::build(FormulaNode::Bottom)
    }

    pub fn prop(name: impl Into<Ident>) -> Formula {
        Formula::build(FormulaNode::Prop(name.into()))
    }

    #[allow(clippy::should_implement_trait)] // constructor named for its variant
    pub fn not(body: Formula) -> Formula {
        Formula::build(FormulaNode::Not(body))
    }

    pub fn and(left: Formula, right: Formula) -> Formula {
        Formula::build(FormulaNode::And(left, right))
    }

    pub fn or(left: Formula, right: Formula) -> Formula {
        Formula::build(FormulaNode::Or(left, right))
    }

    pub fn implies(left: Formula, right: Formula) -> Formula {
        Formula::build(FormulaNode::Implies(left, right))
    }

    pub fn diamond(prog: Program, body: Formula) -> Formula {
        Formula::build(FormulaNode::Diamond(prog, body))
    }

    pub fn boxed(prog: Program, body: Formula) -> Formula {
        Formula::build(FormulaNode::Box(prog, body))
    }

    pub fn node(&self) -> &FormulaNode {
        &self.0.node
    }

    pub fn hash(&self) -> u64 {
        self.0.hash
    }

    /// Number of constructors in the tree, counting program subterms.
    pub fn len(&self) -> usize {
        match self.node() {
            FormulaNode::Top | FormulaNode::Bottom | FormulaNode::Prop(_) => 1,
            FormulaNode::Not(f) => 1 + f.len(),
            FormulaNode::And(l, r) | FormulaNode::Or(l, r) | FormulaNode::Implies(l, r) => {
                1 + l.len() + r.len()
            }
            FormulaNode::Diamond(p, f) | FormulaNode::Box(p, f) => 1 + p.len() + f.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// True for formulas of the form `<alpha>phi`.
    pub fn is_diamond(&self) -> bool {
        matches!(self.node(), FormulaNode::Diamond(..))
    }

    /// For `<sigma>phi` with atomic `sigma`, returns `(sigma, phi)`.
    pub fn as_atomic_diamond(&self) -> Option<(&Ident, &Formula)> {
        match self.node() {
            FormulaNode::Diamond(p, f) => match p.node() {
                ProgramNode::Atomic(name) => Some((name, f)),
                _ => None,
            },
            _ => None,
        }
    }

    /// For `[sigma]phi` with atomic `sigma`, returns `(sigma, phi)`.
    pub fn as_atomic_box(&self) -> Option<(&Ident, &Formula)> {
        match self.node() {
            FormulaNode::Box(p, f) => match p.node() {
                ProgramNode::Atomic(name) => Some((name, f)),
                _ => None,
            },
            _ => None,
        }
    }

    fn tag(&self) -> u8 {
        // Diamond and Box sort before the binary connectives; the graph
        // construction breaks priority ties by this order.
        match self.node() {
            FormulaNode::Top => 0,
            FormulaNode::Bottom => 1,
            FormulaNode::Prop(_) => 2,
            FormulaNode::Not(_) => 3,
            FormulaNode::Diamond(..) => 4,
            FormulaNode::Box(..) => 5,
            FormulaNode::And(..) => 6,
            FormulaNode::Or(..) => 7,
            FormulaNode::Implies(..) => 8,
        }
    }
}

impl PartialEq for Program {
    fn eq(&self, other: &Program) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
            || (self.hash() == other.hash() && self.node() == other.node())
    }
}

impl Eq for Program {}

impl PartialEq for Formula {
    fn eq(&self, other: &Formula) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
            || (self.hash() == other.hash() && self.node() == other.node())
    }
}

impl Eq for Formula {}

impl Hash for Program {
    fn hash<H: Hasher>(&self, state: &mut H) {
        state.write_u64(self.0.hash);
    }
}

impl Hash for Formula {
    fn hash<H: Hasher>(&self, state: &mut H) {
        state.write_u64(self.0.hash);
    }
}

impl Ord for Program {
    fn cmp(&self, other: &Program) -> Ordering {
        if Arc::ptr_eq(&self.0, &other.0) {
            return Ordering::Equal;
        }
        self.tag()
            .cmp(&other.tag())
            .then_with(|| match (self.node(), other.node()) {
                (ProgramNode::Atomic(a), ProgramNode::Atomic(b)) => a.cmp(b),
                (ProgramNode::Seq(l1, r1), ProgramNode::Seq(l2, r2))
                | (ProgramNode::Union(l1, r1), ProgramNode::Union(l2, r2)) => {
                    l1.cmp(l2).then_with(|| r1.cmp(r2))
                }
                (ProgramNode::Star(a), ProgramNode::Star(b)) => a.cmp(b),
                (ProgramNode::Test(a), ProgramNode::Test(b)) => a.cmp(b),
                _ => unreachable!("tags equal"),
            })
    }
}

impl PartialOrd for Program {
    fn partial_cmp(&self, other: &Program) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Formula {
    fn cmp(&self, other: &Formula) -> Ordering {
        if Arc::ptr_eq(&self.0, &other.0) {
            return Ordering::Equal;
        }
        self.tag()
            .cmp(&other.tag())
            .then_with(|| match (self.node(), other.node()) {
                (FormulaNode::Top, FormulaNode::Top)
                | (FormulaNode::Bottom, FormulaNode::Bottom) => Ordering::Equal,
                (FormulaNode::Prop(a), FormulaNode::Prop(b)) => a.cmp(b),
                (FormulaNode::Not(a), FormulaNode::Not(b)) => a.cmp(b),
                (FormulaNode::And(l1, r1), FormulaNode::And(l2, r2))
                | (FormulaNode::Or(l1, r1), FormulaNode::Or(l2, r2))
                | (FormulaNode::Implies(l1, r1), FormulaNode::Implies(l2, r2)) => {
                    l1.cmp(l2).then_with(|| r1.cmp(r2))
                }
                (FormulaNode::Diamond(p1, f1), FormulaNode::Diamond(p2, f2))
                | (FormulaNode::Box(p1, f1), FormulaNode::Box(p2, f2)) => {
                    p1.cmp(p2).then_with(|| f1.cmp(f2))
                }
                _ => unreachable!("tags equal"),
            })
    }
}

impl PartialOrd for Formula {
    fn partial_cmp(&self, other: &Formula) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Debug for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// An ABox assertion: `a : phi` (concept) or `sigma(a, b)` (role).
#[derive(Clone, PartialEq, Eq, Hash)]
pub enum Assertion {
    Concept(Ident, Formula),
    Role(Ident, Ident, Ident),
}

impl Assertion {
    pub fn concept(var: impl Into<Ident>, formula: Formula) -> Assertion {
        Assertion::Concept(var.into(), formula)
    }

    pub fn role(prog: impl Into<Ident>, from: impl Into<Ident>, to: impl Into<Ident>) -> Assertion {
        Assertion::Role(prog.into(), from.into(), to.into())
    }

    /// State variables occurring in the assertion.
    pub fn vars(&self) -> Vec<&Ident> {
        match self {
            Assertion::Concept(a, _) => vec![a],
            Assertion::Role(_, a, b) => vec![a, b],
        }
    }

    pub fn structural_hash(&self) -> u64 {
        let mut h = FNV_OFFSET;
        match self {
            Assertion::Concept(a, f) => {
                h = fnv_mix(h, 1);
                h = fnv_str(h, a.as_str());
                h = fnv_mix(h, f.hash());
            }
            Assertion::Role(p, a, b) => {
                h = fnv_mix(h, 2);
                h = fnv_str(h, p.as_str());
                h = fnv_str(h, a.as_str());
                h = fnv_str(h, b.as_str());
            }
        }
        h
    }
}

impl Ord for Assertion {
    fn cmp(&self, other: &Assertion) -> Ordering {
        match (self, other) {
            (Assertion::Concept(a1, f1), Assertion::Concept(a2, f2)) => {
                a1.cmp(a2).then_with(|| f1.cmp(f2))
            }
            (Assertion::Concept(..), Assertion::Role(..)) => Ordering::Less,
            (Assertion::Role(..), Assertion::Concept(..)) => Ordering::Greater,
            (Assertion::Role(p1, a1, b1), Assertion::Role(p2, a2, b2)) => {
                p1.cmp(p2).then_with(|| a1.cmp(a2)).then_with(|| b1.cmp(b2))
            }
        }
    }
}

impl PartialOrd for Assertion {
    fn partial_cmp(&self, other: &Assertion) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Assertion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// A node-label element: a traditional formula (simple nodes) or an ABox
/// assertion (complex nodes).
#[derive(Clone, PartialEq, Eq, Hash)]
pub enum Item {
    Formula(Formula),
    Assertion(Assertion),
}

impl Item {
    pub fn as_formula(&self) -> Option<&Formula> {
        match self {
            Item::Formula(f) => Some(f),
            Item::Assertion(_) => None,
        }
    }

    pub fn as_assertion(&self) -> Option<&Assertion> {
        match self {
            Item::Assertion(a) => Some(a),
            Item::Formula(_) => None,
        }
    }

    /// The tracked formula shape used by trace analysis: the formula itself,
    /// or the concept formula of an assertion.
    pub fn tracked_formula(&self) -> Option<&Formula> {
        match self {
            Item::Formula(f) => Some(f),
            Item::Assertion(Assertion::Concept(_, f)) => Some(f),
            Item::Assertion(Assertion::Role(..)) => None,
        }
    }

    pub fn structural_hash(&self) -> u64 {
        match self {
            Item::Formula(f) => fnv_mix(FNV_OFFSET, f.hash()),
            Item::Assertion(a) => fnv_mix(fnv_mix(FNV_OFFSET, 7), a.structural_hash()),
        }
    }
}

impl From<Formula> for Item {
    fn from(f: Formula) -> Item {
        Item::Formula(f)
    }
}

impl From<Assertion> for Item {
    fn from(a: Assertion) -> Item {
        Item::Assertion(a)
    }
}

impl Ord for Item {
    fn cmp(&self, other: &Item) -> Ordering {
        match (self, other) {
            (Item::Formula(a), Item::Formula(b)) => a.cmp(b),
            (Item::Formula(_), Item::Assertion(_)) => Ordering::Less,
            (Item::Assertion(_), Item::Formula(_)) => Ordering::Greater,
            (Item::Assertion(a), Item::Assertion(b)) => a.cmp(b),
        }
    }
}

impl PartialOrd for Item {
    fn partial_cmp(&self, other: &Item) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Item {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}
