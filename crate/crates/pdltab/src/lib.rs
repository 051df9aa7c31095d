//! Satisfiability and ABox/TBox consistency checking for propositional
//! dynamic logic (PDL), based on tableaux represented as "and-or" graphs
//! with global caching.
//!
//! The pipeline: formulas ([`syntax`]) are expanded by tableau rules
//! ([`calculus`]) into a cached and-or graph ([`graph`]); the decision
//! procedures ([`decision`]) look for a consistent marking of that graph by
//! propagating unsatisfiability backwards and analysing eventuality traces;
//! positive verdicts are certified by extracting a Kripke model and model
//! checking it ([`semantics`]).
//!
//! ```
//! use pdltab::syntax::{parse_formula, to_nnf};
//! use pdltab::{check_sat, extract_model, model_check, ProblemInput, SolveConfig};
//!
//! let goal = vec![to_nnf(&parse_formula("<s*>p & [s]q").unwrap())];
//! let assumptions = vec![to_nnf(&parse_formula("q -> p").unwrap())];
//!
//! let (verdict, graph) = check_sat(&goal, &assumptions, &SolveConfig::default()).unwrap();
//! assert!(verdict.satisfiable);
//!
//! // every positive verdict can be certified by a concrete model
//! let marking = verdict.witness.expect("satisfiable verdicts carry a witness");
//! let input = ProblemInput::Formulas(goal.clone());
//! let (_, model) = extract_model(&graph, &marking, &input, &assumptions).unwrap();
//! assert!(model_check(&model, 0, &goal[0]));
//! ```
//!
//! Unsatisfiability is a definite answer, not a search timeout:
//!
//! ```
//! use pdltab::syntax::{parse_formula, to_nnf};
//! use pdltab::{check_sat, SolveConfig};
//!
//! let goal = vec![to_nnf(&parse_formula("p & [s*](p -> [s]p) & <s*>~p").unwrap())];
//! let (verdict, _) = check_sat(&goal, &[], &SolveConfig::default()).unwrap();
//! assert!(!verdict.satisfiable);
//! ```

pub mod calculus;
pub mod cli;
pub mod decision;
pub mod graph;
pub mod problem;
pub mod semantics;
pub mod syntax;

pub use decision::{
    check_abox_sat, check_abox_sat_backtracking, check_sat, instance_check, update_unsat_nodes,
    Encoding, Marking, SolveError, Stats, Verdict,
};
pub use graph::{build_graph, build_graph_abox, AndOrGraph, NodeId, SolveConfig};
pub use semantics::{bounded_model_sat, extract_model, model_check, KripkeModel, Signature};
pub use syntax::{Assertion, Formula, Ident, Item, ParseError, Program};

/// A solver input: either a set of traditional formulas or an ABox.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ProblemInput {
    Formulas(Vec<Formula>),
    Abox(Vec<Assertion>),
}
