//! The tableau rules: the base calculus on sets of traditional formulas and
//! its primed extension on sets of ABox assertions, with rule applicability,
//! priority-driven selection, and conclusion computation.
//!
//! Node contents pair a label with `rfs`, the set of formulas already reduced
//! by a static rule since the last transitional step. The rfs restriction is
//! what keeps sequences of static rule applications finite: a conjunction,
//! disjunction, or compound box is reduced as a principal formula at most
//! once between transitions.

use std::collections::BTreeSet;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use crate::syntax::{negate_nnf, Assertion, Formula, FormulaNode, Ident, Item, ProgramNode};

/// Whether a node's contents are traditional formulas or ABox assertions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NodeKind {
    Simple,
    Complex,
}

/// The contents of a tableau node: label, rfs, and kind. This is the unit of
/// global caching, so equality and hashing cover all three fields.
#[derive(Clone, PartialEq, Eq)]
pub struct NodeContents {
    pub kind: NodeKind,
    pub label: BTreeSet<Item>,
    pub rfs: BTreeSet<Item>,
    hash: u64,
}

impl NodeContents {
    pub fn new(kind: NodeKind, label: BTreeSet<Item>, rfs: BTreeSet<Item>) -> NodeContents {
        debug_assert!(label.iter().chain(rfs.iter()).all(|item| match kind {
            NodeKind::Simple => matches!(item, Item::Formula(_)),
            NodeKind::Complex => matches!(item, Item::Assertion(_)),
        }));
        let mut h: u64 = match kind {
            NodeKind::Simple => 0x9e3779b97f4a7c15,
            NodeKind::Complex => 0x6a09e667f3bcc909,
        };
        for item in &label {
            h = h.rotate_left(7) ^ item.structural_hash();
        }
        h = h.rotate_left(31) ^ 0x5bf0;
        for item in &rfs {
            h = h.rotate_left(7) ^ item.structural_hash();
        }
        NodeContents {
            kind,
            label,
            rfs,
            hash: h,
        }
    }

    pub fn simple(label: BTreeSet<Item>, rfs: BTreeSet<Item>) -> NodeContents {
        NodeContents::new(NodeKind::Simple, label, rfs)
    }

    pub fn complex(label: BTreeSet<Item>, rfs: BTreeSet<Item>) -> NodeContents {
        NodeContents::new(NodeKind::Complex, label, rfs)
    }

    /// True iff the label is exactly `{false}`: the terminal clash marker.
    pub fn is_bottom(&self) -> bool {
        self.label.len() == 1
            && self
                .label
                .first()
                .and_then(Item::as_formula)
                .is_some_and(|f| matches!(f.node(), FormulaNode::Bottom))
    }
}

impl Hash for NodeContents {
    fn hash<H: Hasher>(&self, state: &mut H) {
        state.write_u64(self.hash);
    }
}

impl fmt::Debug for NodeContents {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let items: Vec<String> = self.label.iter().map(|i| i.to_string()).collect();
        let rfs: Vec<String> = self.rfs.iter().map(|i| i.to_string()).collect();
        write!(
            f,
            "{:?}{{{}}} rfs{{{}}}",
            self.kind,
            items.join(", "),
            rfs.join(", ")
        )
    }
}

/// Identifiers for every rule of both calculi. The `P` suffix marks the
/// primed (assertion-level) variants; `BoxPrime` is the role-propagation rule
/// for atomic boxes and `TransP` the assertion-level transitional rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RuleId {
    Bot0,
    Bot,
    And,
    Or,
    BoxSeq,
    DmdSeq,
    BoxUnion,
    DmdUnion,
    BoxTest,
    DmdTest,
    BoxStar,
    DmdStar,
    Trans,
    Bot0P,
    BotP,
    AndP,
    OrP,
    BoxSeqP,
    DmdSeqP,
    BoxUnionP,
    DmdUnionP,
    BoxTestP,
    DmdTestP,
    BoxStarP,
    DmdStarP,
    BoxPrime,
    TransP,
}

impl RuleId {
    pub fn is_transitional(self) -> bool {
        matches!(self, RuleId::Trans | RuleId::TransP)
    }

    pub fn is_static(self) -> bool {
        !self.is_transitional()
    }

    /// The transitional rules are the only "and"-rules.
    pub fn is_and_rule(self) -> bool {
        self.is_transitional()
    }

    /// Rules with exactly one (firm) conclusion.
    pub fn is_unary(self) -> bool {
        matches!(
            self,
            RuleId::Bot0
                | RuleId::Bot
                | RuleId::And
                | RuleId::BoxSeq
                | RuleId::DmdSeq
                | RuleId::BoxUnion
                | RuleId::DmdTest
                | RuleId::BoxStar
                | RuleId::Bot0P
                | RuleId::BotP
                | RuleId::AndP
                | RuleId::BoxSeqP
                | RuleId::DmdSeqP
                | RuleId::BoxUnionP
                | RuleId::DmdTestP
                | RuleId::BoxStarP
                | RuleId::BoxPrime
        )
    }

    fn is_clash(self) -> bool {
        matches!(
            self,
            RuleId::Bot0 | RuleId::Bot | RuleId::Bot0P | RuleId::BotP
        )
    }

    pub fn name(self) -> &'static str {
        match self {
            RuleId::Bot0 => "(bot0)",
            RuleId::Bot => "(bot)",
            RuleId::And => "(and)",
            RuleId::Or => "(or)",
            RuleId::BoxSeq => "(box;)",
            RuleId::DmdSeq => "(dia;)",
            RuleId::BoxUnion => "(box+)",
            RuleId::DmdUnion => "(dia+)",
            RuleId::BoxTest => "(box?)",
            RuleId::DmdTest => "(dia?)",
            RuleId::BoxStar => "(box*)",
            RuleId::DmdStar => "(dia*)",
            RuleId::Trans => "(trans)",
            RuleId::Bot0P => "(bot0')",
            RuleId::BotP => "(bot')",
            RuleId::AndP => "(and')",
            RuleId::OrP => "(or')",
            RuleId::BoxSeqP => "(box;')",
            RuleId::DmdSeqP => "(dia;')",
            RuleId::BoxUnionP => "(box+')",
            RuleId::DmdUnionP => "(dia+')",
            RuleId::BoxTestP => "(box?')",
            RuleId::DmdTestP => "(dia?')",
            RuleId::BoxStarP => "(box*')",
            RuleId::DmdStarP => "(dia*')",
            RuleId::BoxPrime => "(box')",
            RuleId::TransP => "(trans')",
        }
    }
}

impl fmt::Display for RuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A rule selected for a concrete premise. `principal` is absent exactly for
/// the transitional rules, whose principals are all atomic diamonds at once.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleInstance {
    pub rule: RuleId,
    pub principal: Option<Item>,
    pub premise: Arc<NodeContents>,
}

/// One conclusion of a rule application. Transitional conclusions carry the
/// diamond (or diamond assertion) that produced them as the edge label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Conclusion {
    pub contents: NodeContents,
    pub edge_label: Option<Item>,
}

// Priority classes, highest first: clash rules, unary static, non-unary
// static, transitional.
const CLASS_CLASH: u8 = 0;
const CLASS_UNARY: u8 = 1;
const CLASS_STATIC: u8 = 2;
const CLASS_TRANS: u8 = 3;

fn rule_class(rule: RuleId) -> u8 {
    if rule.is_clash() {
        CLASS_CLASH
    } else if rule.is_transitional() {
        CLASS_TRANS
    } else if rule.is_unary() {
        CLASS_UNARY
    } else {
        CLASS_STATIC
    }
}

/// Select the rule to expand a node with: the highest-priority applicable
/// rule, ties broken by the canonical order of the principal formula and then
/// by rule identifier. Returns `None` when the node is an end node.
pub fn applicable_rule(
    contents: &Arc<NodeContents>,
    gamma: &BTreeSet<Formula>,
) -> Option<RuleInstance> {
    let _ = gamma; // applicability never depends on the global assumptions
    let mut best: Option<(u8, Option<Item>, RuleId)> = None;
    let mut offer = |class: u8, principal: Option<Item>, rule: RuleId| {
        debug_assert_eq!(class, rule_class(rule));
        let better = match &best {
            None => true,
            Some((bc, bp, br)) => (class, &principal, &rule) < (*bc, bp, br),
        };
        if better {
            best = Some((class, principal, rule));
        }
    };

    match contents.kind {
        NodeKind::Simple => {
            if contents.is_bottom() {
                return None; // terminal clash marker, never re-expanded
            }
            for item in &contents.label {
                let f = item.as_formula().expect("simple label holds formulas");
                if let Some((class, rule)) = simple_rule_for(f, contents) {
                    let principal = if rule.is_transitional() {
                        None
                    } else {
                        Some(item.clone())
                    };
                    offer(class, principal, rule);
                }
                if let FormulaNode::Not(body) = f.node() {
                    if contents.label.contains(&Item::Formula(body.clone())) {
                        offer(CLASS_CLASH, Some(Item::Formula(body.clone())), RuleId::Bot);
                    }
                }
            }
        }
        NodeKind::Complex => {
            for item in &contents.label {
                let a = item.as_assertion().expect("complex label holds assertions");
                match a {
                    Assertion::Concept(var, f) => {
                        if let Some((class, rule)) = complex_rule_for(f, item, contents) {
                            offer(class, Some(item.clone()), rule);
                        }
                        if matches!(f.node(), FormulaNode::Bottom) {
                            offer(CLASS_CLASH, Some(item.clone()), RuleId::Bot0P);
                        }
                        if let FormulaNode::Not(body) = f.node() {
                            let pos =
                                Item::Assertion(Assertion::Concept(var.clone(), body.clone()));
                            if contents.label.contains(&pos) {
                                offer(CLASS_CLASH, Some(pos), RuleId::BotP);
                            }
                        }
                        if f.as_atomic_box().is_some()
                            && box_prime_target(contents, var, f).is_some()
                        {
                            offer(CLASS_UNARY, Some(item.clone()), RuleId::BoxPrime);
                        }
                        if f.as_atomic_diamond().is_some() {
                            offer(CLASS_TRANS, None, RuleId::TransP);
                        }
                    }
                    Assertion::Role(..) => {}
                }
            }
        }
    }

    best.map(|(_, principal, rule)| RuleInstance {
        rule,
        principal,
        premise: contents.clone(),
    })
}

fn simple_rule_for(f: &Formula, contents: &NodeContents) -> Option<(u8, RuleId)> {
    let in_rfs = || contents.rfs.contains(&Item::Formula(f.clone()));
    match f.node() {
        FormulaNode::Bottom => Some((CLASS_CLASH, RuleId::Bot0)),
        FormulaNode::And(..) if !in_rfs() => Some((CLASS_UNARY, RuleId::And)),
        FormulaNode::Or(..) if !in_rfs() => Some((CLASS_STATIC, RuleId::Or)),
        FormulaNode::Box(p, _) => match p.node() {
            ProgramNode::Atomic(_) => None,
            ProgramNode::Seq(..) if !in_rfs() => Some((CLASS_UNARY, RuleId::BoxSeq)),
            ProgramNode::Union(..) if !in_rfs() => Some((CLASS_UNARY, RuleId::BoxUnion)),
            ProgramNode::Test(_) if !in_rfs() => Some((CLASS_STATIC, RuleId::BoxTest)),
            ProgramNode::Star(_) if !in_rfs() => Some((CLASS_UNARY, RuleId::BoxStar)),
            _ => None,
        },
        // The diamond reduction rules are never blocked by rfs; eventualities
        // must stay reducible so they can be realized.
        FormulaNode::Diamond(p, _) => match p.node() {
            ProgramNode::Atomic(_) => Some((CLASS_TRANS, RuleId::Trans)),
            ProgramNode::Seq(..) => Some((CLASS_UNARY, RuleId::DmdSeq)),
            ProgramNode::Union(..) => Some((CLASS_STATIC, RuleId::DmdUnion)),
            ProgramNode::Test(_) => Some((CLASS_UNARY, RuleId::DmdTest)),
            ProgramNode::Star(_) => Some((CLASS_STATIC, RuleId::DmdStar)),
        },
        _ => None,
    }
}

// Unlike the base calculus, every primed reduction rule (diamonds included)
// is rfs-restricted; together with the monotonicity of primed conclusions
// this keeps paths of complex nodes finite.
fn complex_rule_for(
    f: &Formula,
    principal: &Item,
    contents: &NodeContents,
) -> Option<(u8, RuleId)> {
    let rule = match f.node() {
        FormulaNode::And(..) => (CLASS_UNARY, RuleId::AndP),
        FormulaNode::Or(..) => (CLASS_STATIC, RuleId::OrP),
        FormulaNode::Box(p, _) => match p.node() {
            ProgramNode::Atomic(_) => return None, // handled by BoxPrime
            ProgramNode::Seq(..) => (CLASS_UNARY, RuleId::BoxSeqP),
            ProgramNode::Union(..) => (CLASS_UNARY, RuleId::BoxUnionP),
            ProgramNode::Test(_) => (CLASS_STATIC, RuleId::BoxTestP),
            ProgramNode::Star(_) => (CLASS_UNARY, RuleId::BoxStarP),
        },
        FormulaNode::Diamond(p, _) => match p.node() {
            ProgramNode::Atomic(_) => return None, // handled by TransP
            ProgramNode::Seq(..) => (CLASS_UNARY, RuleId::DmdSeqP),
            ProgramNode::Union(..) => (CLASS_STATIC, RuleId::DmdUnionP),
            ProgramNode::Test(_) => (CLASS_UNARY, RuleId::DmdTestP),
            ProgramNode::Star(_) => (CLASS_STATIC, RuleId::DmdStarP),
        },
        _ => return None,
    };
    if contents.rfs.contains(principal) {
        None
    } else {
        Some(rule)
    }
}

/// The least pair `(b, phi)` such that the label holds `sigma(a, b)` for the
/// atomic box `a : [sigma]phi` but not yet `b : phi`. Role propagation is
/// applicable only while such a pair exists (proper-superset condition).
fn box_prime_target(
    contents: &NodeContents,
    var: &Ident,
    boxf: &Formula,
) -> Option<(Ident, Formula)> {
    let (sigma, body) = boxf.as_atomic_box().expect("atomic box");
    contents.label.iter().find_map(|item| match item {
        Item::Assertion(Assertion::Role(p, a, b)) if p == sigma && a == var => {
            let derived = Item::Assertion(Assertion::Concept(b.clone(), body.clone()));
            if contents.label.contains(&derived) {
                None
            } else {
                Some((b.clone(), body.clone()))
            }
        }
        _ => None,
    })
}

fn principal_formula(inst: &RuleInstance) -> (&Formula, Option<&Ident>) {
    match inst
        .principal
        .as_ref()
        .expect("static rule has a principal")
    {
        Item::Formula(f) => (f, None),
        Item::Assertion(Assertion::Concept(a, f)) => (f, Some(a)),
        Item::Assertion(Assertion::Role(..)) => panic!("role assertion as principal"),
    }
}

/// Apply a rule instance produced by [`applicable_rule`], returning its
/// conclusions in schema order.
pub fn apply_rule(inst: &RuleInstance, gamma: &BTreeSet<Formula>) -> Vec<Conclusion> {
    let premise = &inst.premise;
    match inst.rule {
        RuleId::Bot0 | RuleId::Bot | RuleId::Bot0P | RuleId::BotP => {
            let mut label = BTreeSet::new();
            label.insert(Item::Formula(Formula::bottom()));
            vec![Conclusion {
                contents: NodeContents::simple(label, BTreeSet::new()),
                edge_label: None,
            }]
        }
        RuleId::Trans => {
            let mut out = Vec::new();
            for item in &premise.label {
                let f = item.as_formula().expect("simple label");
                if let Some((sigma, body)) = f.as_atomic_diamond() {
                    let mut label: BTreeSet<Item> = BTreeSet::new();
                    label.insert(Item::Formula(body.clone()));
                    for other in &premise.label {
                        let g = other.as_formula().expect("simple label");
                        if let Some((s2, psi)) = g.as_atomic_box() {
                            if s2 == sigma {
                                label.insert(Item::Formula(psi.clone()));
                            }
                        }
                    }
                    for g in gamma {
                        label.insert(Item::Formula(g.clone()));
                    }
                    out.push(Conclusion {
                        contents: NodeContents::simple(label, BTreeSet::new()),
                        edge_label: Some(item.clone()),
                    });
                }
            }
            out
        }
        RuleId::TransP => {
            let mut out = Vec::new();
            for item in &premise.label {
                if let Item::Assertion(Assertion::Concept(var, f)) = item {
                    if let Some((sigma, body)) = f.as_atomic_diamond() {
                        let mut label: BTreeSet<Item> = BTreeSet::new();
                        label.insert(Item::Formula(body.clone()));
                        for other in &premise.label {
                            if let Item::Assertion(Assertion::Concept(v2, g)) = other {
                                if v2 == var {
                                    if let Some((s2, psi)) = g.as_atomic_box() {
                                        if s2 == sigma {
                                            label.insert(Item::Formula(psi.clone()));
                                        }
                                    }
                                }
                            }
                        }
                        for g in gamma {
                            label.insert(Item::Formula(g.clone()));
                        }
                        out.push(Conclusion {
                            contents: NodeContents::simple(label, BTreeSet::new()),
                            edge_label: Some(item.clone()),
                        });
                    }
                }
            }
            out
        }
        RuleId::BoxPrime => {
            let (boxf, var) = principal_formula(inst);
            let var = var.expect("primed principal").clone();
            let (b, body) =
                box_prime_target(premise, &var, boxf).expect("role-propagation target exists");
            let mut label = premise.label.clone();
            label.insert(Item::Assertion(Assertion::Concept(b, body)));
            vec![Conclusion {
                contents: NodeContents::complex(label, premise.rfs.clone()),
                edge_label: None,
            }]
        }
        rule => {
            let (f, var) = principal_formula(inst);
            let var = var.cloned();
            let branches = reduction_branches(rule, f);
            let principal = inst.principal.clone().expect("static rule has a principal");
            let mut rfs = premise.rfs.clone();
            rfs.insert(principal.clone());
            branches
                .into_iter()
                .map(|derived| {
                    let mut label = premise.label.clone();
                    match &var {
                        // Primed reduction rules keep the principal and add
                        // the derived assertions; the premise is a subset of
                        // every conclusion (monotonic).
                        Some(a) => {
                            for d in derived {
                                label.insert(Item::Assertion(Assertion::Concept(a.clone(), d)));
                            }
                        }
                        // Base-calculus static rules replace the principal.
                        None => {
                            label.remove(&principal);
                            for d in derived {
                                label.insert(Item::Formula(d));
                            }
                        }
                    }
                    let contents = match premise.kind {
                        NodeKind::Simple => NodeContents::simple(label, rfs.clone()),
                        NodeKind::Complex => NodeContents::complex(label, rfs.clone()),
                    };
                    Conclusion {
                        contents,
                        edge_label: None,
                    }
                })
                .collect()
        }
    }
}

/// The derived formulas of each branch of a (non-clash, non-transitional)
/// reduction rule applied to principal `f`, in schema order.
fn reduction_branches(rule: RuleId, f: &Formula) -> Vec<Vec<Formula>> {
    match (rule, f.node()) {
        (RuleId::And | RuleId::AndP, FormulaNode::And(l, r)) => vec![vec![l.clone(), r.clone()]],
        (RuleId::Or | RuleId::OrP, FormulaNode::Or(l, r)) => vec![vec![l.clone()], vec![r.clone()]],
        (RuleId::BoxSeq | RuleId::BoxSeqP, FormulaNode::Box(p, body)) => match p.node() {
            ProgramNode::Seq(alpha, beta) => vec![vec![Formula::boxed(
                alpha.clone(),
                Formula::boxed(beta.clone(), body.clone()),
            )]],
            _ => panic!("malformed instance: {rule} on {f}"),
        },
        (RuleId::DmdSeq | RuleId::DmdSeqP, FormulaNode::Diamond(p, body)) => match p.node() {
            ProgramNode::Seq(alpha, beta) => vec![vec![Formula::diamond(
                alpha.clone(),
                Formula::diamond(beta.clone(), body.clone()),
            )]],
            _ => panic!("malformed instance: {rule} on {f}"),
        },
        (RuleId::BoxUnion | RuleId::BoxUnionP, FormulaNode::Box(p, body)) => match p.node() {
            ProgramNode::Union(alpha, beta) => vec![vec![
                Formula::boxed(alpha.clone(), body.clone()),
                Formula::boxed(beta.clone(), body.clone()),
            ]],
            _ => panic!("malformed instance: {rule} on {f}"),
        },
        (RuleId::DmdUnion | RuleId::DmdUnionP, FormulaNode::Diamond(p, body)) => match p.node() {
            ProgramNode::Union(alpha, beta) => vec![
                vec![Formula::diamond(alpha.clone(), body.clone())],
                vec![Formula::diamond(beta.clone(), body.clone())],
            ],
            _ => panic!("malformed instance: {rule} on {f}"),
        },
        (RuleId::BoxTest | RuleId::BoxTestP, FormulaNode::Box(p, body)) => match p.node() {
            // The negated test condition is computed lazily here rather than
            // precomputed during NNF conversion.
            ProgramNode::Test(cond) => vec![vec![negate_nnf(cond)], vec![body.clone()]],
            _ => panic!("malformed instance: {rule} on {f}"),
        },
        (RuleId::DmdTest | RuleId::DmdTestP, FormulaNode::Diamond(p, body)) => match p.node() {
            ProgramNode::Test(cond) => vec![vec![cond.clone(), body.clone()]],
            _ => panic!("malformed instance: {rule} on {f}"),
        },
        (RuleId::BoxStar | RuleId::BoxStarP, FormulaNode::Box(p, body)) => match p.node() {
            ProgramNode::Star(alpha) => {
                vec![vec![body.clone(), Formula::boxed(alpha.clone(), f.clone())]]
            }
            _ => panic!("malformed instance: {rule} on {f}"),
        },
        (RuleId::DmdStar | RuleId::DmdStarP, FormulaNode::Diamond(p, body)) => match p.node() {
            ProgramNode::Star(alpha) => vec![
                vec![body.clone()],
                vec![Formula::diamond(alpha.clone(), f.clone())],
            ],
            _ => panic!("malformed instance: {rule} on {f}"),
        },
        _ => panic!("malformed instance: {rule} on {f}"),
    }
}

/// For a node expanded by a diamond reduction rule, the formula each
/// successor's trace step rewrites the principal to, aligned with conclusion
/// (and hence edge) order. Used by eventuality trace analysis.
pub fn diamond_trace_steps(rule: RuleId, principal: &Formula) -> Option<Vec<Formula>> {
    match rule {
        RuleId::DmdSeq
        | RuleId::DmdSeqP
        | RuleId::DmdUnion
        | RuleId::DmdUnionP
        | RuleId::DmdTest
        | RuleId::DmdTestP
        | RuleId::DmdStar
        | RuleId::DmdStarP => Some(match static_trace_steps(principal) {
            steps if !steps.is_empty() => steps,
            _ => return None,
        }),
        _ => None,
    }
}

/// One-step rewrites of the outer program constructor of a diamond formula:
/// the successor formulas of a (static) trace step. Empty for atomic-program
/// diamonds and non-diamonds.
pub fn static_trace_steps(f: &Formula) -> Vec<Formula> {
    match f.node() {
        FormulaNode::Diamond(p, body) => match p.node() {
            ProgramNode::Atomic(_) => vec![],
            ProgramNode::Seq(alpha, beta) => vec![Formula::diamond(
                alpha.clone(),
                Formula::diamond(beta.clone(), body.clone()),
            )],
            ProgramNode::Union(alpha, beta) => vec![
                Formula::diamond(alpha.clone(), body.clone()),
                Formula::diamond(beta.clone(), body.clone()),
            ],
            ProgramNode::Test(_) => vec![body.clone()],
            ProgramNode::Star(alpha) => {
                vec![body.clone(), Formula::diamond(alpha.clone(), f.clone())]
            }
        },
        _ => vec![],
    }
}
