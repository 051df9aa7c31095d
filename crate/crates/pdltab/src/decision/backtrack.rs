//! Backtracking ABox satisfiability: depth-first exploration of the complex
//! or-branchings, with global caching only for simple nodes and for the
//! complex and-nodes reached at the end of each path. A branch is decided by
//! fully expanding the subgraph rooted at its and-node and checking it for a
//! consistent marking; node statuses persist in the shared store, so work
//! from failed branches (unsatisfiable simple regions, refuted and-nodes) is
//! reused by later ones.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::sync::Arc;
use std::time::Instant;

use crate::calculus::{applicable_rule, apply_rule, NodeContents, RuleId, RuleInstance};
use crate::graph::{
    abox_root, AndOrGraph, ClosureCheck, Edge, NodeClass, NodeId, SolveConfig, Status,
};
use crate::syntax::{Assertion, Formula};

use super::{consistency_loop, current_marking_from, finish, Marking, SolveError, Stats, Verdict};

fn contents_order(a: &NodeContents, b: &NodeContents) -> Ordering {
    a.label.cmp(&b.label).then_with(|| a.rfs.cmp(&b.rfs))
}

struct Search<'a> {
    store: AndOrGraph,
    gamma: BTreeSet<Formula>,
    cfg: &'a SolveConfig,
    check: ClosureCheck,
    stats: Stats,
    /// Path nodes visited during the search; they are not cached, so each
    /// visit counts as explored work.
    transient: usize,
}

/// A satisfiable branch: the or-path from the root (in anchor-to-root order)
/// and the consistent subgraph found below its final node.
struct SatTail {
    path_rev: Vec<RuleInstance>,
    anchor: NodeId,
    marking: Marking,
}

impl Search<'_> {
    fn assumed_sat(&self) -> BTreeSet<NodeId> {
        self.store
            .nodes()
            .filter(|n| n.status == Status::Sat)
            .map(|n| n.id)
            .collect()
    }

    fn explore(&mut self, contents: NodeContents) -> Result<Option<SatTail>, SolveError> {
        if self.transient + self.store.len() >= self.cfg.max_nodes {
            return Err(SolveError::NodeLimit {
                limit: self.cfg.max_nodes,
            });
        }
        let contents = Arc::new(contents);
        let rule = applicable_rule(&contents, &self.gamma);
        match rule {
            // A complex node with no applicable rule, or one expanded by the
            // transitional rule, anchors the branch: cache it and decide the
            // subgraph it generates.
            None => self.decide_anchor(&contents),
            Some(inst) if inst.rule == RuleId::TransP => self.decide_anchor(&contents),
            Some(inst) if matches!(inst.rule, RuleId::Bot0P | RuleId::BotP) => {
                self.transient += 1;
                Ok(None)
            }
            Some(inst) => {
                self.transient += 1;
                let conclusions = apply_rule(&inst, &self.gamma);
                let mut order: Vec<usize> = (0..conclusions.len()).collect();
                order.sort_by(|&i, &j| {
                    contents_order(&conclusions[i].contents, &conclusions[j].contents)
                });
                for i in order {
                    if let Some(mut tail) = self.explore(conclusions[i].contents.clone())? {
                        tail.path_rev.push(inst);
                        return Ok(Some(tail));
                    }
                }
                Ok(None)
            }
        }
    }

    fn decide_anchor(
        &mut self,
        contents: &Arc<NodeContents>,
    ) -> Result<Option<SatTail>, SolveError> {
        let (anchor, is_new) = self.store.intern(contents.as_ref().clone(), self.cfg)?;
        if is_new {
            self.store
                .expand(anchor, &self.gamma, self.cfg, Some(&self.check))?;
            self.store
                .expand_all(&self.gamma, self.cfg, Some(&self.check))?;
        } else if self.store.node(anchor).status == Status::Unsat {
            return Ok(None); // refuted on an earlier branch
        }
        let assumed = self.assumed_sat();
        let marking = consistency_loop(&mut self.store, anchor, &assumed, &mut self.stats);
        Ok(marking.map(|marking| SatTail {
            path_rev: Vec::new(),
            anchor,
            marking,
        }))
    }
}

/// Decide satisfiability of the ABox `a` w.r.t. the TBox `gamma` by
/// backtracking over complex or-branchings instead of caching complex nodes.
/// Agrees with [`super::check_abox_sat`] on every input.
///
/// On a satisfiable verdict the returned graph holds the cached simple
/// regions, the checked and-nodes, and the successful path (its root is the
/// problem root); on unsatisfiable verdicts it holds only the cached parts.
pub fn check_abox_sat_backtracking(
    a: &[Assertion],
    gamma: &[Formula],
    cfg: &SolveConfig,
) -> Result<(Verdict, AndOrGraph), SolveError> {
    let started = Instant::now();
    assert!(!a.is_empty(), "ABox must be nonempty");
    crate::graph::assert_nnf_formulas(
        a.iter()
            .filter_map(|x| match x {
                Assertion::Concept(_, f) => Some(f),
                Assertion::Role(..) => None,
            })
            .chain(gamma.iter()),
    );
    let mut search = Search {
        store: AndOrGraph::empty(),
        gamma: gamma.iter().cloned().collect(),
        cfg,
        check: ClosureCheck::for_abox(a, gamma),
        stats: Stats::default(),
        transient: 0,
    };
    let outcome = search.explore(abox_root(a, gamma))?;
    let Search {
        mut store,
        stats,
        transient,
        ..
    } = search;

    let witness = outcome.map(|tail| {
        let mut marking = tail.marking;
        let mut ids = Vec::with_capacity(tail.path_rev.len());
        for inst in tail.path_rev.into_iter().rev() {
            let premise = inst.premise.as_ref().clone();
            let id = store.push_uncached(premise);
            let node = store.node_mut(id);
            node.class = NodeClass::OrNode;
            node.rule = Some(inst);
            ids.push(id);
        }
        for (i, &id) in ids.iter().enumerate() {
            let target = ids.get(i + 1).copied().unwrap_or(tail.anchor);
            store.node_mut(id).out.push(Edge {
                target,
                label: None,
            });
            store.node_mut(target).parents.push(id);
            marking.members.insert(id);
            marking.edges.insert((id, 0));
        }
        store.root = ids.first().copied().unwrap_or(tail.anchor);
        debug_assert!(
            current_marking_from(&store, store.root, &BTreeSet::new()).is_some(),
            "materialized path is reachable"
        );
        marking
    });
    let mut verdict = finish(&mut store, witness, stats, started);
    verdict.stats.nodes += transient;
    Ok((verdict, store))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse_assertion, parse_formula};

    fn formulas(texts: &[&str]) -> Vec<Formula> {
        texts.iter().map(|t| parse_formula(t).unwrap()).collect()
    }

    fn assertions(texts: &[&str]) -> Vec<Assertion> {
        texts.iter().map(|t| parse_assertion(t).unwrap()).collect()
    }

    #[test]
    fn abox_star_example_is_unsat_by_backtracking() {
        let (verdict, _) = check_abox_sat_backtracking(
            &assertions(&["a : [s]<s*>p", "s(a,b)"]),
            &formulas(&["~p"]),
            &SolveConfig::default(),
        )
        .unwrap();
        assert!(!verdict.satisfiable);
    }

    #[test]
    fn disjunctive_fact_is_sat_on_some_branch() {
        let (verdict, g) =
            check_abox_sat_backtracking(&assertions(&["a : p | q"]), &[], &SolveConfig::default())
                .unwrap();
        assert!(verdict.satisfiable);
        let m = verdict.witness.unwrap();
        assert!(m.contains(g.root));
        assert!(super::super::verify_marking(&g, &m).is_ok());
    }

    #[test]
    fn simple_work_is_shared_between_branches() {
        // both disjuncts force the same successor state; the second branch
        // must reuse the first branch's refuted simple region
        let (verdict, _) = check_abox_sat_backtracking(
            &assertions(&["a : p | q", "a : <s>(r & ~r)"]),
            &[],
            &SolveConfig::default(),
        )
        .unwrap();
        assert!(!verdict.satisfiable);
    }

    #[test]
    fn clash_at_the_root_refutes_without_any_anchor() {
        let (verdict, g) = check_abox_sat_backtracking(
            &assertions(&["a : p", "a : ~p"]),
            &[],
            &SolveConfig::default(),
        )
        .unwrap();
        assert!(!verdict.satisfiable);
        assert!(g.is_empty(), "nothing needed caching");
        assert_eq!(verdict.stats.nodes, 1, "one explored path node");
    }

    #[test]
    fn trivially_consistent_end_anchor() {
        let (verdict, g) = check_abox_sat_backtracking(
            &assertions(&["a : p", "s(a,b)"]),
            &[],
            &SolveConfig::default(),
        )
        .unwrap();
        assert!(verdict.satisfiable);
        assert_eq!(g.node(g.root).class, NodeClass::EndNode);
    }
}
