//! The trace graph: nodes are pairs of a marking member and a formula of its
//! label, edges follow one-step traces of eventualities. A diamond-shaped
//! pair is productive iff some path reaches a pair whose formula is not a
//! diamond; unproductive pairs pinpoint the nodes violating global
//! consistency.
//!
//! Complex nodes contribute pairs when they are and-nodes or end nodes: both
//! terminate a run of primed static rules, so both are where assertion-level
//! eventualities must have their static realizations. (An end node is simply
//! an and-node whose transitional rule found no atomic diamonds.)

use std::collections::{BTreeSet, HashMap, VecDeque};

use crate::calculus::{diamond_trace_steps, static_trace_steps, NodeKind};
use crate::graph::{AndOrGraph, NodeClass, NodeId};
use crate::syntax::{Assertion, Item};

use super::Marking;

#[derive(Debug, Clone)]
pub struct TraceGraph {
    /// Pairs `(node, tracked item)` in deterministic order.
    pub nodes: Vec<(NodeId, Item)>,
    index: HashMap<(NodeId, Item), usize>,
    succs: Vec<Vec<usize>>,
    /// True iff the tracked formula is not a diamond (the trace is complete).
    pub end: Vec<bool>,
    /// Shortest number of trace steps to an end pair, when one is reachable.
    pub dist: Vec<Option<u32>>,
}

impl TraceGraph {
    pub fn build(g: &AndOrGraph, m: &Marking) -> TraceGraph {
        TraceGraph::build_with_assumed_ends(g, m, &BTreeSet::new())
    }

    /// Like [`TraceGraph::build`], with every pair at a node in
    /// `assumed_end` treated as an end pair. Used by the backtracking
    /// procedure to reuse nodes already known to be satisfiable.
    pub(crate) fn build_with_assumed_ends(
        g: &AndOrGraph,
        m: &Marking,
        assumed_end: &BTreeSet<NodeId>,
    ) -> TraceGraph {
        let mut nodes = Vec::new();
        let mut index = HashMap::new();
        for &v in &m.members {
            let node = g.node(v);
            match node.contents.kind {
                NodeKind::Simple => {
                    for item in node.label() {
                        index.insert((v, item.clone()), nodes.len());
                        nodes.push((v, item.clone()));
                    }
                }
                NodeKind::Complex => {
                    if matches!(node.class, NodeClass::AndNode | NodeClass::EndNode) {
                        for item in node.label() {
                            if matches!(item, Item::Assertion(Assertion::Concept(..))) {
                                index.insert((v, item.clone()), nodes.len());
                                nodes.push((v, item.clone()));
                            }
                        }
                    }
                }
            }
        }

        let mut succs = vec![Vec::new(); nodes.len()];
        let mut end = vec![false; nodes.len()];
        for (i, (v, item)) in nodes.iter().enumerate() {
            let tracked = item.tracked_formula().expect("trace pairs track formulas");
            if !tracked.is_diamond() || assumed_end.contains(v) {
                end[i] = true;
                continue;
            }
            let node = g.node(*v);
            match (node.contents.kind, item) {
                (NodeKind::Simple, Item::Formula(f)) => {
                    let rule = node
                        .rule
                        .as_ref()
                        .expect("diamond labels are never end nodes");
                    if rule.rule.is_transitional() {
                        // at an and-node every diamond is atomic and crosses
                        // its own labelled edge
                        let (_, body) = f
                            .as_atomic_diamond()
                            .expect("static rules fire on compound diamonds");
                        for (e, edge) in node.out.iter().enumerate() {
                            if edge.label.as_ref() == Some(item) && m.edges.contains(&(*v, e)) {
                                if let Some(&j) =
                                    index.get(&(edge.target, Item::Formula(body.clone())))
                                {
                                    succs[i].push(j);
                                }
                            }
                        }
                    } else if rule.principal.as_ref() == Some(item) {
                        let steps = diamond_trace_steps(rule.rule, f)
                            .expect("principal diamond has trace steps");
                        debug_assert_eq!(steps.len(), node.out.len());
                        for ((e, edge), step) in node.out.iter().enumerate().zip(steps) {
                            if m.edges.contains(&(*v, e)) {
                                if let Some(&j) =
                                    index.get(&(edge.target, Item::Formula(step.clone())))
                                {
                                    succs[i].push(j);
                                }
                            }
                        }
                    } else {
                        // carried unchanged across any member edge
                        for (e, edge) in node.out.iter().enumerate() {
                            if m.edges.contains(&(*v, e)) {
                                if let Some(&j) = index.get(&(edge.target, item.clone())) {
                                    succs[i].push(j);
                                }
                            }
                        }
                    }
                }
                (NodeKind::Complex, Item::Assertion(Assertion::Concept(a, f))) => {
                    // static trace steps stay inside the label of v
                    for step in static_trace_steps(f) {
                        let next = Item::Assertion(Assertion::Concept(a.clone(), step));
                        if let Some(&j) = index.get(&(*v, next)) {
                            succs[i].push(j);
                        }
                    }
                    // an atomic diamond assertion crosses its transitional edge
                    if let Some((_, body)) = f.as_atomic_diamond() {
                        for (e, edge) in node.out.iter().enumerate() {
                            if edge.label.as_ref() == Some(item) && m.edges.contains(&(*v, e)) {
                                if let Some(&j) =
                                    index.get(&(edge.target, Item::Formula(body.clone())))
                                {
                                    succs[i].push(j);
                                }
                            }
                        }
                    }
                }
                _ => unreachable!("trace pair kinds"),
            }
        }

        // shortest distance to an end pair, by reverse breadth-first search
        let mut preds = vec![Vec::new(); nodes.len()];
        for (i, outs) in succs.iter().enumerate() {
            for &j in outs {
                preds[j].push(i);
            }
        }
        let mut dist = vec![None; nodes.len()];
        let mut queue = VecDeque::new();
        for (i, &is_end) in end.iter().enumerate() {
            if is_end {
                dist[i] = Some(0);
                queue.push_back(i);
            }
        }
        while let Some(i) = queue.pop_front() {
            let d = dist[i].expect("queued pairs have distances");
            for &p in &preds[i] {
                if dist[p].is_none() {
                    dist[p] = Some(d + 1);
                    queue.push_back(p);
                }
            }
        }

        TraceGraph {
            nodes,
            index,
            succs,
            end,
            dist,
        }
    }

    pub fn idx(&self, v: NodeId, item: &Item) -> Option<usize> {
        self.index.get(&(v, item.clone())).copied()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// The `(graph node, tracked item)` pair at index `i`.
    pub fn pair(&self, i: usize) -> &(NodeId, Item) {
        &self.nodes[i]
    }

    pub fn successors(&self, i: usize) -> &[usize] {
        &self.succs[i]
    }

    pub fn is_productive(&self, i: usize) -> bool {
        self.dist[i].is_some()
    }

    /// Pair reachable from `i` in one step that lies on a shortest path to an
    /// end pair; ties broken by pair order.
    pub fn shortest_step(&self, i: usize) -> Option<usize> {
        let d = self.dist[i]?;
        if d == 0 {
            return None;
        }
        self.succs[i]
            .iter()
            .copied()
            .filter(|&j| self.dist[j] == Some(d - 1))
            .min_by(|&a, &b| self.nodes[a].cmp(&self.nodes[b]))
    }

    /// Graph nodes owning at least one unproductive diamond pair.
    pub fn unrealized_nodes(&self) -> BTreeSet<NodeId> {
        let mut out = BTreeSet::new();
        for (i, (v, _)) in self.nodes.iter().enumerate() {
            if !self.end[i] && self.dist[i].is_none() {
                out.insert(*v);
            }
        }
        out
    }
}
