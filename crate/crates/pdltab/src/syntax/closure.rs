//! Fischer-Ladner closure of a set of NNF formulas: the least set closed
//! under decomposition of connectives and of box/diamond program structure.
//! Node labels and rule conclusions always stay inside this set, which is
//! what bounds the tableau graph.

use std::collections::BTreeSet;
use std::collections::HashSet;

use super::ast::{Formula, FormulaNode, ProgramNode};
use super::nnf::negate_nnf;

/// The `size` of a finite formula set: the length of the conjunction of its
/// members (sum of lengths plus one connective between each pair).
pub fn set_size<'a>(formulas: impl IntoIterator<Item = &'a Formula>) -> usize {
    let mut total = 0usize;
    let mut count = 0usize;
    for f in formulas {
        total += f.len();
        count += 1;
    }
    total + count.saturating_sub(1)
}

#[derive(PartialEq, Eq, Hash, Clone)]
enum Task {
    Fl(Formula),
    FlBox(Formula),
    FlDmd(Formula),
}

/// Fischer-Ladner closure of `x`. All members must be in NNF.
pub fn fl_closure<'a>(x: impl IntoIterator<Item = &'a Formula>) -> BTreeSet<Formula> {
    let mut out = BTreeSet::new();
    let mut seen: HashSet<Task> = HashSet::new();
    let mut stack: Vec<Task> = x.into_iter().cloned().map(Task::Fl).collect();
    while let Some(task) = stack.pop() {
        if !seen.insert(task.clone()) {
            continue;
        }
        match task {
            Task::Fl(f) => match f.node() {
                FormulaNode::Top
                | FormulaNode::Bottom
                | FormulaNode::Prop(_)
                | FormulaNode::Not(_) => {
                    out.insert(f.clone());
                }
                FormulaNode::And(l, r) | FormulaNode::Or(l, r) => {
                    out.insert(f.clone());
                    stack.push(Task::Fl(l.clone()));
                    stack.push(Task::Fl(r.clone()));
                }
                FormulaNode::Box(_, body) => {
                    stack.push(Task::FlBox(f.clone()));
                    stack.push(Task::Fl(body.clone()));
                }
                FormulaNode::Diamond(_, body) => {
                    stack.push(Task::FlDmd(f.clone()));
                    stack.push(Task::Fl(body.clone()));
                }
                FormulaNode::Implies(..) => panic!("fl_closure: input not in NNF: {f}"),
            },
            Task::FlBox(f) => {
                let (p, body) = match f.node() {
                    FormulaNode::Box(p, body) => (p, body),
                    _ => unreachable!("FlBox holds a box formula"),
                };
                out.insert(f.clone());
                match p.node() {
                    ProgramNode::Atomic(_) => {}
                    ProgramNode::Seq(alpha, beta) => {
                        let inner = Formula::boxed(beta.clone(), body.clone());
                        stack.push(Task::FlBox(Formula::boxed(alpha.clone(), inner.clone())));
                        stack.push(Task::FlBox(inner));
                    }
                    ProgramNode::Union(alpha, beta) => {
                        stack.push(Task::FlBox(Formula::boxed(alpha.clone(), body.clone())));
                        stack.push(Task::FlBox(Formula::boxed(beta.clone(), body.clone())));
                    }
                    ProgramNode::Star(alpha) => {
                        stack.push(Task::FlBox(Formula::boxed(alpha.clone(), f.clone())));
                    }
                    ProgramNode::Test(cond) => {
                        stack.push(Task::Fl(negate_nnf(cond)));
                    }
                }
            }
            Task::FlDmd(f) => {
                let (p, body) = match f.node() {
                    FormulaNode::Diamond(p, body) => (p, body),
                    _ => unreachable!("FlDmd holds a diamond formula"),
                };
                out.insert(f.clone());
                match p.node() {
                    ProgramNode::Atomic(_) => {}
                    ProgramNode::Seq(alpha, beta) => {
                        let inner = Formula::diamond(beta.clone(), body.clone());
                        stack.push(Task::FlDmd(Formula::diamond(alpha.clone(), inner.clone())));
                        stack.push(Task::FlDmd(inner));
                    }
                    ProgramNode::Union(alpha, beta) => {
                        stack.push(Task::FlDmd(Formula::diamond(alpha.clone(), body.clone())));
                        stack.push(Task::FlDmd(Formula::diamond(beta.clone(), body.clone())));
                    }
                    ProgramNode::Star(alpha) => {
                        stack.push(Task::FlDmd(Formula::diamond(alpha.clone(), f.clone())));
                    }
                    ProgramNode::Test(cond) => {
                        stack.push(Task::Fl(cond.clone()));
                    }
                }
            }
        }
    }
    out
}
