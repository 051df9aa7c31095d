//! Kripke models and their relational semantics: program evaluation, model
//! checking of the full formula syntax, validation against global
//! assumptions and ABoxes, model extraction from consistent markings, and a
//! bounded brute-force satisfiability oracle.

mod extract;
mod model;
mod oracle;

pub use extract::{
    extract_model, is_locally_consistent, is_saturated, saturation_path, ExtractError, ModelGraph,
    StateName,
};
pub use model::{
    eval_program, model_check, parse_model, satisfies_abox, validates, KripkeModel, ModelError,
};
pub use oracle::{bounded_model_sat, OracleError, Signature};
