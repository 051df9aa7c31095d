//! The "and-or" tableau graph. Nodes are globally cached by contents
//! (kind, label, rfs), so each distinct premise is expanded exactly once and
//! repeated conclusions become shared successors — re-derivations turn into
//! back edges and the graph stays finite.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt::Write as _;
use std::sync::Arc;

use thiserror::Error;

use crate::calculus::{applicable_rule, apply_rule, NodeContents, NodeKind, RuleInstance};
use crate::syntax::{fl_closure, is_nnf, Assertion, Formula, Ident, Item};

pub type NodeId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeClass {
    OrNode,
    AndNode,
    EndNode,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Unexpanded,
    Expanded,
    Unsat,
    Sat,
}

/// An edge to a successor. `label` is present exactly on transitional edges,
/// where it records the principal diamond the conclusion realizes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub target: NodeId,
    pub label: Option<Item>,
}

#[derive(Debug, Clone)]
pub struct TableauNode {
    pub id: NodeId,
    pub contents: Arc<NodeContents>,
    pub class: NodeClass,
    pub rule: Option<RuleInstance>,
    pub out: Vec<Edge>,
    pub parents: Vec<NodeId>,
    pub status: Status,
}

impl TableauNode {
    pub fn label(&self) -> &BTreeSet<Item> {
        &self.contents.label
    }

    pub fn is_bottom(&self) -> bool {
        self.contents.is_bottom()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SolveConfig {
    /// Hard cap on created nodes; exceeding it is a resource error, never a
    /// wrong verdict.
    pub max_nodes: usize,
}

impl Default for SolveConfig {
    fn default() -> SolveConfig {
        SolveConfig {
            max_nodes: 1_000_000,
        }
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum BuildError {
    #[error("node limit of {limit} exceeded while expanding the graph")]
    NodeLimit { limit: usize },
}

/// The cached tableau graph.
#[derive(Debug, Clone)]
pub struct AndOrGraph {
    nodes: Vec<TableauNode>,
    cache: HashMap<Arc<NodeContents>, NodeId>,
    pub root: NodeId,
}

impl AndOrGraph {
    pub(crate) fn empty() -> AndOrGraph {
        AndOrGraph {
            nodes: Vec::new(),
            cache: HashMap::new(),
            root: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, id: NodeId) -> &TableauNode {
        &self.nodes[id]
    }

    pub fn nodes(&self) -> impl Iterator<Item = &TableauNode> {
        self.nodes.iter()
    }

    pub fn set_status(&mut self, id: NodeId, status: Status) {
        self.nodes[id].status = status;
    }

    /// Node with the given contents, if present.
    pub fn lookup(&self, contents: &NodeContents) -> Option<NodeId> {
        self.cache.get(contents).copied()
    }

    /// Find a node by its exact label (test helper; labels are not unique in
    /// general, contents are).
    pub fn find_by_label(&self, label: &BTreeSet<Item>) -> Option<NodeId> {
        self.nodes.iter().find(|n| n.label() == label).map(|n| n.id)
    }

    /// Intern `contents`, creating an unexpanded node if new.
    pub(crate) fn intern(
        &mut self,
        contents: NodeContents,
        cfg: &SolveConfig,
    ) -> Result<(NodeId, bool), BuildError> {
        if let Some(&id) = self.cache.get(&contents) {
            return Ok((id, false));
        }
        if self.nodes.len() >= cfg.max_nodes {
            return Err(BuildError::NodeLimit {
                limit: cfg.max_nodes,
            });
        }
        let id = self.nodes.len();
        let contents = Arc::new(contents);
        self.cache.insert(contents.clone(), id);
        self.nodes.push(TableauNode {
            id,
            contents,
            class: NodeClass::EndNode,
            rule: None,
            out: Vec::new(),
            parents: Vec::new(),
            status: Status::Unexpanded,
        });
        Ok((id, true))
    }

    /// Append a node with `contents` without registering it in the content
    /// cache. Used by the backtracking procedure to record the complex nodes
    /// of its successful path, which are not globally cached.
    pub(crate) fn push_uncached(&mut self, contents: NodeContents) -> NodeId {
        let id = self.nodes.len();
        self.nodes.push(TableauNode {
            id,
            contents: Arc::new(contents),
            class: NodeClass::EndNode,
            rule: None,
            out: Vec::new(),
            parents: Vec::new(),
            status: Status::Expanded,
        });
        id
    }

    pub(crate) fn node_mut(&mut self, id: NodeId) -> &mut TableauNode {
        &mut self.nodes[id]
    }

    /// Expand one node: select its rule, compute conclusions, connect them
    /// through the cache. Returns newly created successor ids.
    pub(crate) fn expand(
        &mut self,
        id: NodeId,
        gamma: &BTreeSet<Formula>,
        cfg: &SolveConfig,
        check: Option<&ClosureCheck>,
    ) -> Result<Vec<NodeId>, BuildError> {
        debug_assert_eq!(self.nodes[id].status, Status::Unexpanded);
        let contents = self.nodes[id].contents.clone();
        let mut created = Vec::new();
        match applicable_rule(&contents, gamma) {
            None => {
                self.nodes[id].class = NodeClass::EndNode;
            }
            Some(inst) => {
                let conclusions = apply_rule(&inst, gamma);
                debug_assert!(!conclusions.is_empty());
                self.nodes[id].class = if inst.rule.is_and_rule() {
                    NodeClass::AndNode
                } else {
                    NodeClass::OrNode
                };
                for concl in conclusions {
                    if let Some(check) = check {
                        check.assert_conclusion(&concl.contents);
                    }
                    debug_assert!(
                        !(contents.kind == NodeKind::Simple
                            && concl.contents.kind == NodeKind::Complex),
                        "no edges from simple to complex nodes"
                    );
                    debug_assert!(
                        !inst.rule.is_transitional() || concl.contents.rfs.is_empty(),
                        "transitional targets start with empty rfs"
                    );
                    let (target, is_new) = self.intern(concl.contents, cfg)?;
                    if is_new {
                        created.push(target);
                    }
                    self.nodes[id].out.push(Edge {
                        target,
                        label: concl.edge_label,
                    });
                    self.nodes[target].parents.push(id);
                }
                self.nodes[id].rule = Some(inst);
            }
        }
        self.nodes[id].status = Status::Expanded;
        Ok(created)
    }

    /// Breadth-first full expansion from the current frontier.
    pub(crate) fn expand_all(
        &mut self,
        gamma: &BTreeSet<Formula>,
        cfg: &SolveConfig,
        check: Option<&ClosureCheck>,
    ) -> Result<(), BuildError> {
        let mut queue: VecDeque<NodeId> = (0..self.nodes.len())
            .filter(|&id| self.nodes[id].status == Status::Unexpanded)
            .collect();
        while let Some(id) = queue.pop_front() {
            for new_id in self.expand(id, gamma, cfg, check)? {
                queue.push_back(new_id);
            }
        }
        Ok(())
    }

    /// DOT rendering of the graph: one record per node (id, class, rule,
    /// label), transitional edges annotated with their labels. Output is
    /// byte-stable for a fixed graph (nodes emitted in id order).
    pub fn to_dot(&self) -> String {
        let mut out = String::new();
        out.push_str("digraph tableau {\n");
        out.push_str("  node [shape=record, fontname=\"monospace\"];\n");
        for node in &self.nodes {
            let class = match node.class {
                NodeClass::OrNode => "or",
                NodeClass::AndNode => "and",
                NodeClass::EndNode => "end",
            };
            let rule = node.rule.as_ref().map(|r| r.rule.name()).unwrap_or("-");
            let label: Vec<String> = node
                .label()
                .iter()
                .map(|i| escape_record(&i.to_string()))
                .collect();
            let _ = writeln!(
                out,
                "  n{} [label=\"{{({}) {} {}|{}}}\"];",
                node.id,
                node.id,
                class,
                escape_record(rule),
                label.join("\\n")
            );
        }
        for node in &self.nodes {
            for edge in &node.out {
                match &edge.label {
                    Some(item) => {
                        let _ = writeln!(
                            out,
                            "  n{} -> n{} [label=\"{}\"];",
                            node.id,
                            edge.target,
                            escape_record(&item.to_string())
                        );
                    }
                    None => {
                        let _ = writeln!(out, "  n{} -> n{};", node.id, edge.target);
                    }
                }
            }
        }
        out.push_str("}\n");
        out
    }
}

fn escape_record(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '<' | '>' | '|' | '{' | '}' | '"' | '\\' => {
                out.push('\\');
                out.push(c);
            }
            _ => out.push(c),
        }
    }
    out
}

/// Closure-membership assertions performed while the graph is built.
pub(crate) struct ClosureCheck {
    closure: BTreeSet<Formula>,
}

impl ClosureCheck {
    pub(crate) fn for_formulas(x: &[Formula], gamma: &[Formula]) -> ClosureCheck {
        let mut closure = fl_closure(x.iter().chain(gamma.iter()));
        closure.insert(Formula::bottom()); // terminal clash marker
        ClosureCheck { closure }
    }

    pub(crate) fn for_abox(a: &[Assertion], gamma: &[Formula]) -> ClosureCheck {
        let concepts: Vec<Formula> = a
            .iter()
            .filter_map(|assertion| match assertion {
                Assertion::Concept(_, f) => Some(f.clone()),
                Assertion::Role(..) => None,
            })
            .collect();
        let mut closure = fl_closure(concepts.iter().chain(gamma.iter()));
        closure.insert(Formula::bottom());
        ClosureCheck { closure }
    }

    fn assert_conclusion(&self, contents: &NodeContents) {
        if cfg!(debug_assertions) {
            for item in contents.label.iter().chain(contents.rfs.iter()) {
                if let Some(f) = item.tracked_formula() {
                    debug_assert!(
                        self.closure.contains(f),
                        "conclusion formula {f} escapes the closure"
                    );
                }
            }
        }
    }
}

/// State variables occurring in an ABox, sorted.
pub fn abox_vars(a: &[Assertion]) -> BTreeSet<Ident> {
    a.iter()
        .flat_map(|assertion| assertion.vars().into_iter().cloned())
        .collect()
}

/// Root contents for a formula problem: label `X ∪ Γ`, empty rfs.
pub fn formula_root(x: &[Formula], gamma: &[Formula]) -> NodeContents {
    let label: BTreeSet<Item> = x
        .iter()
        .chain(gamma.iter())
        .cloned()
        .map(Item::Formula)
        .collect();
    NodeContents::simple(label, BTreeSet::new())
}

/// Root contents for an ABox problem: the ABox plus `a : γ` for every global
/// assumption γ and every state variable `a` occurring in the ABox.
pub fn abox_root(a: &[Assertion], gamma: &[Formula]) -> NodeContents {
    let mut label: BTreeSet<Item> = a.iter().cloned().map(Item::Assertion).collect();
    for var in abox_vars(a) {
        for g in gamma {
            label.insert(Item::Assertion(Assertion::Concept(var.clone(), g.clone())));
        }
    }
    NodeContents::complex(label, BTreeSet::new())
}

pub(crate) fn assert_nnf_formulas<'a>(formulas: impl IntoIterator<Item = &'a Formula>) {
    for f in formulas {
        assert!(is_nnf(f), "input formula not in NNF: {f}");
    }
}

/// Build the fully expanded graph for `(X, Γ)`. All formulas must be in NNF.
pub fn build_graph(
    x: &[Formula],
    gamma: &[Formula],
    cfg: &SolveConfig,
) -> Result<AndOrGraph, BuildError> {
    assert_nnf_formulas(x.iter().chain(gamma.iter()));
    let gamma_set: BTreeSet<Formula> = gamma.iter().cloned().collect();
    let check = ClosureCheck::for_formulas(x, gamma);
    let mut graph = AndOrGraph::empty();
    let (root, _) = graph.intern(formula_root(x, gamma), cfg)?;
    graph.root = root;
    graph.expand_all(&gamma_set, cfg, Some(&check))?;
    Ok(graph)
}

/// Build the fully expanded graph for `(A, Γ)`: complex nodes are expanded by
/// the primed rules, simple nodes by the base rules.
pub fn build_graph_abox(
    a: &[Assertion],
    gamma: &[Formula],
    cfg: &SolveConfig,
) -> Result<AndOrGraph, BuildError> {
    assert!(!a.is_empty(), "ABox must be nonempty");
    assert_nnf_formulas(
        a.iter()
            .filter_map(|x| match x {
                Assertion::Concept(_, f) => Some(f),
                Assertion::Role(..) => None,
            })
            .chain(gamma.iter()),
    );
    let gamma_set: BTreeSet<Formula> = gamma.iter().cloned().collect();
    let check = ClosureCheck::for_abox(a, gamma);
    let mut graph = AndOrGraph::empty();
    let (root, _) = graph.intern(abox_root(a, gamma), cfg)?;
    graph.root = root;
    graph.expand_all(&gamma_set, cfg, Some(&check))?;
    Ok(graph)
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

    fn label_set(g: &AndOrGraph, id: NodeId) -> BTreeSet<String> {
        g.node(id).label().iter().map(|i| i.to_string()).collect()
    }

    fn all_label_sets(g: &AndOrGraph) -> BTreeSet<BTreeSet<String>> {
        g.nodes()
            .map(|n| n.label().iter().map(|i| i.to_string()).collect())
            .collect()
    }

    fn to_set(texts: &[&str]) -> BTreeSet<String> {
        texts.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn reproduces_the_nine_node_star_example() {
        let g = build_graph(
            &formulas(&["<s*>p", "[s*]q"]),
            &formulas(&["~p | ~q"]),
            &SolveConfig::default(),
        )
        .unwrap();
        assert_eq!(g.len(), 9);
        let expected: BTreeSet<BTreeSet<String>> = [
            to_set(&["<s*>p", "[s*]q", "~p | ~q"]),
            to_set(&["<s*>p", "q", "[s][s*]q", "~p | ~q"]),
            to_set(&["p", "q", "[s][s*]q", "~p | ~q"]),
            to_set(&["<s><s*>p", "q", "[s][s*]q", "~p | ~q"]),
            to_set(&["p", "q", "[s][s*]q", "~p"]),
            to_set(&["p", "q", "[s][s*]q", "~q"]),
            to_set(&["false"]),
            to_set(&["<s><s*>p", "q", "[s][s*]q", "~p"]),
            to_set(&["<s><s*>p", "q", "[s][s*]q", "~q"]),
        ]
        .into_iter()
        .collect();
        assert_eq!(all_label_sets(&g), expected);

        assert_eq!(
            label_set(&g, g.root),
            to_set(&["<s*>p", "[s*]q", "~p | ~q"])
        );

        // the transitional back edge into the root
        let and_node = g
            .nodes()
            .find(|n| n.class == NodeClass::AndNode)
            .expect("one and-node");
        assert_eq!(
            label_set(&g, and_node.id),
            to_set(&["<s><s*>p", "q", "[s][s*]q", "~p"])
        );
        assert_eq!(and_node.out.len(), 1);
        assert_eq!(and_node.out[0].target, g.root);
        assert_eq!(
            and_node.out[0].label.as_ref().unwrap().to_string(),
            "<s><s*>p"
        );
    }

    #[test]
    fn single_formula_is_an_end_node() {
        let g = build_graph(&formulas(&["p"]), &[], &SolveConfig::default()).unwrap();
        assert_eq!(g.len(), 1);
        assert_eq!(g.node(g.root).class, NodeClass::EndNode);
    }

    #[test]
    fn star_of_test_builds_a_finite_graph_with_a_back_edge() {
        let g = build_graph(&formulas(&["<(p?)*>q"]), &[], &SolveConfig::default()).unwrap();
        // caching must close the re-derivation loop
        let mut has_back_edge = false;
        for node in g.nodes() {
            for edge in &node.out {
                if edge.target <= node.id {
                    has_back_edge = true;
                }
            }
        }
        assert!(has_back_edge, "expected a cycle among static nodes");
        assert!(g.len() <= 16, "graph unexpectedly large: {}", g.len());
    }

    #[test]
    fn reproduces_the_eight_node_abox_example() {
        let g = build_graph_abox(
            &assertions(&["a : [s]<s*>p", "s(a,b)"]),
            &formulas(&["~p"]),
            &SolveConfig::default(),
        )
        .unwrap();
        assert_eq!(g.len(), 8);
        let expected: BTreeSet<BTreeSet<String>> = [
            to_set(&["a : [s]<s*>p", "s(a,b)", "a : ~p", "b : ~p"]),
            to_set(&["a : [s]<s*>p", "s(a,b)", "a : ~p", "b : ~p", "b : <s*>p"]),
            to_set(&[
                "a : [s]<s*>p",
                "s(a,b)",
                "a : ~p",
                "b : ~p",
                "b : <s*>p",
                "b : p",
            ]),
            to_set(&["false"]),
            to_set(&[
                "a : [s]<s*>p",
                "s(a,b)",
                "a : ~p",
                "b : ~p",
                "b : <s*>p",
                "b : <s><s*>p",
            ]),
            to_set(&["<s*>p", "~p"]),
            to_set(&["p", "~p"]),
            to_set(&["<s><s*>p", "~p"]),
        ]
        .into_iter()
        .collect();
        assert_eq!(all_label_sets(&g), expected);

        // complex and-node crosses into the simple region with a labelled edge
        let and_nodes: Vec<_> = g
            .nodes()
            .filter(|n| n.class == NodeClass::AndNode)
            .collect();
        assert_eq!(and_nodes.len(), 2);
        let complex_and = and_nodes
            .iter()
            .find(|n| n.contents.kind == NodeKind::Complex)
            .expect("complex and-node");
        assert_eq!(complex_and.out.len(), 1);
        assert_eq!(
            complex_and.out[0].label.as_ref().unwrap().to_string(),
            "b : <s><s*>p"
        );
        assert_eq!(
            label_set(&g, complex_and.out[0].target),
            to_set(&["<s*>p", "~p"])
        );
    }

    #[test]
    fn singleton_abox_is_an_end_node() {
        let g = build_graph_abox(&assertions(&["a : p"]), &[], &SolveConfig::default()).unwrap();
        assert_eq!(g.len(), 1);
        assert_eq!(g.node(g.root).class, NodeClass::EndNode);
    }

    #[test]
    fn abox_disjunction_keeps_principal_in_both_branches() {
        let g =
            build_graph_abox(&assertions(&["a : p | q"]), &[], &SolveConfig::default()).unwrap();
        assert_eq!(g.len(), 3);
        let root = g.node(g.root);
        assert_eq!(root.class, NodeClass::OrNode);
        assert_eq!(root.out.len(), 2);
        for edge in &root.out {
            let succ = g.node(edge.target);
            assert!(root.label().is_subset(succ.label()), "monotonic labels");
        }
    }

    #[test]
    fn contents_are_unique_and_trans_targets_reset_rfs() {
        let g = build_graph(
            &formulas(&["<s*>p", "[s*]q"]),
            &formulas(&["~p | ~q"]),
            &SolveConfig::default(),
        )
        .unwrap();
        let mut seen = std::collections::HashSet::new();
        for node in g.nodes() {
            assert!(seen.insert(node.contents.clone()), "duplicate contents");
            if node.class == NodeClass::AndNode {
                for edge in &node.out {
                    assert!(g.node(edge.target).contents.rfs.is_empty());
                }
            }
        }
    }

    #[test]
    fn identical_conclusions_share_a_node_with_parallel_labelled_edges() {
        // two diamonds over different programs with the same body collapse
        // into one successor but keep their own labelled edges
        let g = build_graph(&formulas(&["<s>p", "<t>p"]), &[], &SolveConfig::default()).unwrap();
        let root = g.node(g.root);
        assert_eq!(root.class, NodeClass::AndNode);
        assert_eq!(root.out.len(), 2);
        assert_eq!(root.out[0].target, root.out[1].target);
        let labels: Vec<String> = root
            .out
            .iter()
            .map(|e| e.label.as_ref().unwrap().to_string())
            .collect();
        assert_eq!(labels, vec!["<s>p", "<t>p"]);
        assert_eq!(g.len(), 2);
    }

    #[test]
    fn node_cap_is_a_resource_error() {
        let err = build_graph(
            &formulas(&["<s*>p", "[s*]q"]),
            &formulas(&["~p | ~q"]),
            &SolveConfig { max_nodes: 3 },
        )
        .unwrap_err();
        assert_eq!(err, BuildError::NodeLimit { limit: 3 });
    }

    #[test]
    fn dot_output_is_deterministic_and_labels_trans_edges() {
        let build = || {
            build_graph(
                &formulas(&["<s*>p", "[s*]q"]),
                &formulas(&["~p | ~q"]),
                &SolveConfig::default(),
            )
            .unwrap()
            .to_dot()
        };
        let dot = build();
        assert_eq!(dot, build());
        assert!(dot.starts_with("digraph tableau {"));
        assert!(
            dot.contains("n6 -> n0 [label=\"\\<s\\>\\<s*\\>p\"]"),
            "{dot}"
        );
    }
}
