//! Kripke-model extraction from a consistent marking. Runs of static
//! (or-node) expansions are merged into single states whose formula sets
//! accumulate label and rfs of their final node; transitional crossings
//! become relation edges. Diamond realizations are followed along shortest
//! productive paths in the trace graph of the final marking.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet, VecDeque};
use std::fmt;

use thiserror::Error;

use crate::calculus::{NodeContents, NodeKind};
use crate::decision::{Marking, TraceGraph};
use crate::graph::{abox_vars, AndOrGraph, NodeClass, NodeId};
use crate::syntax::{negate_nnf, Assertion, Formula, FormulaNode, Ident, Item, ProgramNode};
use crate::ProblemInput;

use super::model::KripkeModel;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum ExtractError {
    /// The marking violates an invariant extraction relies on; this
    /// indicates a bug in the decision procedure, not bad user input.
    #[error("extraction invariant violated: {0}")]
    Invariant(String),
}

fn invariant(msg: impl Into<String>) -> ExtractError {
    ExtractError::Invariant(msg.into())
}

/// How an extracted state was introduced.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StateName {
    /// The distinguished state satisfying the goal set.
    Tau,
    /// Fresh states, numbered in creation order.
    Fresh(usize),
    /// States named by the ABox state variables.
    Var(Ident),
}

impl fmt::Display for StateName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StateName::Tau => f.write_str("tau"),
            StateName::Fresh(i) => write!(f, "w{i}"),
            StateName::Var(name) => write!(f, "{name}"),
        }
    }
}

/// The structure extraction builds first: states with formula sets `H` and
/// one relation per atomic program. The corresponding Kripke model reads the
/// propositions off the `H` sets.
#[derive(Debug, Clone)]
pub struct ModelGraph {
    pub names: Vec<StateName>,
    pub labels: Vec<BTreeSet<Formula>>,
    pub rels: BTreeMap<Ident, BTreeSet<(usize, usize)>>,
}

impl ModelGraph {
    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    /// The Kripke model corresponding to this model graph.
    pub fn to_kripke(&self, vars: &BTreeMap<Ident, usize>) -> KripkeModel {
        let mut model = KripkeModel::new(self.len());
        for (state, h) in self.labels.iter().enumerate() {
            for f in h {
                if let FormulaNode::Prop(name) = f.node() {
                    model.props.entry(name.clone()).or_default().insert(state);
                }
            }
        }
        model.rels = self.rels.clone();
        model.vars = vars.clone();
        model
    }
}

/// No `H` set contains `false` or a clashing pair `p`, `~p`.
pub fn is_locally_consistent(mg: &ModelGraph) -> bool {
    mg.labels.iter().all(|h| {
        !h.contains(&Formula::bottom())
            && h.iter().all(|f| match f.node() {
                FormulaNode::Not(body) => !h.contains(body),
                _ => true,
            })
    })
}

/// The saturation conditions: every `H` set is closed under one decomposition
/// step of each boolean or box constructor, and atomic boxes push their body
/// along the matching relation edges.
pub fn is_saturated(mg: &ModelGraph) -> bool {
    saturation_violation(mg).is_none()
}

pub(crate) fn saturation_violation(mg: &ModelGraph) -> Option<String> {
    for (state, h) in mg.labels.iter().enumerate() {
        for f in h {
            match f.node() {
                FormulaNode::And(l, r) => {
                    if !h.contains(l) || !h.contains(r) {
                        return Some(format!("state {state}: {f} lacks a conjunct"));
                    }
                }
                FormulaNode::Or(l, r) => {
                    if !h.contains(l) && !h.contains(r) {
                        return Some(format!("state {state}: {f} lacks both disjuncts"));
                    }
                }
                FormulaNode::Diamond(p, _) => {
                    if let ProgramNode::Test(cond) = p.node() {
                        if !h.contains(cond) {
                            return Some(format!("state {state}: {f} lacks its test"));
                        }
                    }
                }
                FormulaNode::Box(p, body) => match p.node() {
                    ProgramNode::Atomic(name) => {
                        if let Some(rel) = mg.rels.get(name) {
                            for &(x, y) in rel {
                                if x == state && !mg.labels[y].contains(body) {
                                    return Some(format!(
                                        "state {state}: {f} not pushed to successor {y}"
                                    ));
                                }
                            }
                        }
                    }
                    ProgramNode::Seq(alpha, beta) => {
                        let step = Formula::boxed(
                            alpha.clone(),
                            Formula::boxed(beta.clone(), body.clone()),
                        );
                        if !h.contains(&step) {
                            return Some(format!("state {state}: {f} not decomposed"));
                        }
                    }
                    ProgramNode::Union(alpha, beta) => {
                        if !h.contains(&Formula::boxed(alpha.clone(), body.clone()))
                            || !h.contains(&Formula::boxed(beta.clone(), body.clone()))
                        {
                            return Some(format!("state {state}: {f} not decomposed"));
                        }
                    }
                    ProgramNode::Test(cond) => {
                        if !h.contains(&negate_nnf(cond)) && !h.contains(body) {
                            return Some(format!("state {state}: {f} not decomposed"));
                        }
                    }
                    ProgramNode::Star(alpha) => {
                        if !h.contains(body)
                            || !h.contains(&Formula::boxed(alpha.clone(), f.clone()))
                        {
                            return Some(format!("state {state}: {f} not decomposed"));
                        }
                    }
                },
                _ => {}
            }
        }
    }
    None
}

/// A saturation path of `v`: a chain of or-nodes inside the marking ending at
/// an and-node or a rule-free end node. At or-nodes reducing a diamond the
/// walk follows that diamond's shortest productive realization when one
/// exists; otherwise it takes the least member successor.
pub fn saturation_path(
    g: &AndOrGraph,
    m: &Marking,
    v: NodeId,
) -> Result<Vec<NodeId>, ExtractError> {
    let tg = TraceGraph::build(g, m);
    saturation_path_with(g, m, &tg, v)
}

fn saturation_path_with(
    g: &AndOrGraph,
    m: &Marking,
    tg: &TraceGraph,
    v: NodeId,
) -> Result<Vec<NodeId>, ExtractError> {
    if !m.contains(v) {
        return Err(invariant(format!("node {v} is not in the marking")));
    }
    let mut path = vec![v];
    let mut seen: HashSet<NodeId> = [v].into_iter().collect();
    let mut cur = v;
    loop {
        let node = g.node(cur);
        match node.class {
            NodeClass::AndNode | NodeClass::EndNode => return Ok(path),
            NodeClass::OrNode => {
                let rule = node.rule.as_ref().expect("or-nodes have rules");
                let guided = rule
                    .principal
                    .as_ref()
                    .filter(|item| item.tracked_formula().is_some_and(Formula::is_diamond))
                    .and_then(|item| tg.idx(cur, item))
                    .and_then(|i| tg.shortest_step(i))
                    .map(|j| tg.pair(j).0);
                let next = match guided {
                    Some(w) => w,
                    None => m
                        .edges_of(g, cur)
                        .map(|(_, target)| target)
                        .min()
                        .ok_or_else(|| invariant(format!("or-node {cur} has no member edge")))?,
                };
                if !seen.insert(next) {
                    return Err(invariant(format!("saturation path revisits node {next}")));
                }
                path.push(next);
                cur = next;
            }
        }
    }
}

fn contents_h(contents: &NodeContents) -> BTreeSet<Formula> {
    contents
        .label
        .iter()
        .chain(contents.rfs.iter())
        .filter_map(Item::as_formula)
        .cloned()
        .collect()
}

struct Extraction<'a> {
    g: &'a AndOrGraph,
    m: &'a Marking,
    tg: TraceGraph,
    names: Vec<StateName>,
    labels: Vec<BTreeSet<Formula>>,
    rels: BTreeMap<Ident, BTreeSet<(usize, usize)>>,
    /// The graph node whose contents each state accumulates.
    anchor_of: Vec<NodeId>,
    /// Deduplication of fresh states by their formula set.
    by_h: HashMap<BTreeSet<Formula>, usize>,
    queue: VecDeque<usize>,
    fresh: usize,
}

impl<'a> Extraction<'a> {
    fn new(g: &'a AndOrGraph, m: &'a Marking) -> Extraction<'a> {
        Extraction {
            g,
            m,
            tg: TraceGraph::build(g, m),
            names: Vec::new(),
            labels: Vec::new(),
            rels: BTreeMap::new(),
            anchor_of: Vec::new(),
            by_h: HashMap::new(),
            queue: VecDeque::new(),
            fresh: 0,
        }
    }

    fn push_state(&mut self, name: StateName, h: BTreeSet<Formula>, anchor: NodeId) -> usize {
        let id = self.names.len();
        self.names.push(name);
        self.labels.push(h);
        self.anchor_of.push(anchor);
        self.queue.push_back(id);
        id
    }

    /// State for an anchor reached mid-realization, deduplicated by its
    /// formula set.
    fn intern_state(&mut self, anchor: NodeId) -> usize {
        let h = contents_h(&self.g.node(anchor).contents);
        if let Some(&id) = self.by_h.get(&h) {
            return id;
        }
        self.fresh += 1;
        let id = self.push_state(StateName::Fresh(self.fresh), h.clone(), anchor);
        self.by_h.insert(h, id);
        id
    }

    fn add_edge(&mut self, from: usize, sigma: &Ident, to: usize) {
        self.rels
            .entry(sigma.clone())
            .or_default()
            .insert((from, to));
    }

    fn shortest_step(&self, i: usize) -> Result<usize, ExtractError> {
        self.tg
            .shortest_step(i)
            .ok_or_else(|| invariant("eventuality has no productive step".to_string()))
    }

    /// Follow the realization of one atomic diamond from state `from`,
    /// creating states for every and-node the trace crosses and closing with
    /// a saturation path once the eventuality is fulfilled.
    fn realize(
        &mut self,
        from: usize,
        sigma0: &Ident,
        start: NodeId,
        tracked0: Formula,
    ) -> Result<(), ExtractError> {
        let mut prev = from;
        let mut sigma = sigma0.clone();
        let mut cur = self
            .tg
            .idx(start, &Item::Formula(tracked0))
            .ok_or_else(|| invariant("trace pair missing after crossing".to_string()))?;
        let mut steps = 0usize;
        let step_cap = self.tg.len() + 1;
        loop {
            steps += 1;
            if steps > step_cap {
                return Err(invariant(
                    "realization walk exceeded the trace graph".to_string(),
                ));
            }
            let (node, tracked) = {
                let (n, item) = self.tg.pair(cur);
                (*n, item.tracked_formula().expect("tracked formula").clone())
            };
            if !tracked.is_diamond() {
                // fulfilled: merge the remaining static run into one state
                let path = saturation_path_with(self.g, self.m, &self.tg, node)?;
                let anchor = *path.last().expect("path is nonempty");
                let state = self.intern_state(anchor);
                self.add_edge(prev, &sigma, state);
                return Ok(());
            }
            match self.g.node(node).class {
                NodeClass::OrNode => {
                    cur = self.shortest_step(cur)?;
                }
                NodeClass::AndNode => {
                    let state = self.intern_state(node);
                    self.add_edge(prev, &sigma, state);
                    prev = state;
                    let (next_sigma, _) = tracked
                        .as_atomic_diamond()
                        .ok_or_else(|| invariant("compound diamond at an and-node".to_string()))?;
                    sigma = next_sigma.clone();
                    cur = self.shortest_step(cur)?;
                }
                NodeClass::EndNode => {
                    return Err(invariant("eventuality stranded at an end node".to_string()));
                }
            }
        }
    }

    /// Resolve one state: realize each atomic diamond of its formula set.
    /// `crossing` locates the transitional edge for a diamond at the state's
    /// anchor node.
    fn resolve(&mut self, state: usize) -> Result<(), ExtractError> {
        let anchor = self.anchor_of[state];
        let h = self.labels[state].clone();
        for f in h {
            let Some((sigma, body)) = f.as_atomic_diamond().map(|(s, b)| (s.clone(), b.clone()))
            else {
                continue;
            };
            let anchor_node = self.g.node(anchor);
            let wanted = match anchor_node.contents.kind {
                NodeKind::Simple => Item::Formula(f.clone()),
                NodeKind::Complex => {
                    let StateName::Var(var) = &self.names[state] else {
                        return Err(invariant("complex anchor for a fresh state".to_string()));
                    };
                    Item::Assertion(Assertion::Concept(var.clone(), f.clone()))
                }
            };
            let target = anchor_node
                .out
                .iter()
                .find(|e| e.label.as_ref() == Some(&wanted))
                .map(|e| e.target)
                .ok_or_else(|| {
                    invariant(format!(
                        "no transitional edge for {wanted} at node {anchor}"
                    ))
                })?;
            self.realize(state, &sigma, target, body)?;
        }
        Ok(())
    }

    fn run(&mut self) -> Result<(), ExtractError> {
        while let Some(state) = self.queue.pop_front() {
            self.resolve(state)?;
        }
        Ok(())
    }
}

/// Extract a model graph and its Kripke model from a verified consistent
/// marking. For formula problems the distinguished first state satisfies the
/// goal set; for ABox problems the state variables name the initial states
/// and the variable assignment is returned in the model.
pub fn extract_model(
    g: &AndOrGraph,
    m: &Marking,
    input: &ProblemInput,
    gamma: &[Formula],
) -> Result<(ModelGraph, KripkeModel), ExtractError> {
    let mut ex = Extraction::new(g, m);
    let mut vars: BTreeMap<Ident, usize> = BTreeMap::new();

    match input {
        ProblemInput::Formulas(_) => {
            let path = saturation_path_with(g, m, &ex.tg, g.root)?;
            let anchor = *path.last().expect("path is nonempty");
            let h = contents_h(&g.node(anchor).contents);
            ex.by_h.insert(h.clone(), 0);
            ex.push_state(StateName::Tau, h, anchor);
        }
        ProblemInput::Abox(a) => {
            let path = saturation_path_with(g, m, &ex.tg, g.root)?;
            let anchor = *path.last().expect("path is nonempty");
            let anchor_node = g.node(anchor);
            if anchor_node.contents.kind != NodeKind::Complex {
                return Err(invariant(
                    "ABox root path must end at a complex node".to_string(),
                ));
            }
            for var in abox_vars(a) {
                let h: BTreeSet<Formula> = anchor_node
                    .label()
                    .iter()
                    .filter_map(|item| match item {
                        Item::Assertion(Assertion::Concept(v, f)) if *v == var => Some(f.clone()),
                        _ => None,
                    })
                    .collect();
                let id = ex.push_state(StateName::Var(var.clone()), h, anchor);
                vars.insert(var, id);
            }
            for assertion in a {
                if let Assertion::Role(prog, from, to) = assertion {
                    let (x, y) = (vars[from], vars[to]);
                    ex.add_edge(x, prog, y);
                }
            }
        }
    }

    ex.run()?;

    let mg = ModelGraph {
        names: ex.names,
        labels: ex.labels,
        rels: ex.rels,
    };
    if let Some(violation) = saturation_violation(&mg) {
        return Err(invariant(format!(
            "extracted model graph not saturated: {violation}"
        )));
    }
    if !is_locally_consistent(&mg) {
        return Err(invariant(
            "extracted model graph not locally consistent".to_string(),
        ));
    }
    let model = mg.to_kripke(&vars);
    let _ = gamma;
    Ok((mg, model))
}
