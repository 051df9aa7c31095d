//! Abstract syntax, parsing, printing, negation normal form, and
//! Fischer-Ladner closure computation.

mod ast;
mod closure;
mod nnf;
mod parse;
mod print;

pub use ast::{Assertion, Formula, FormulaNode, Ident, Item, Program, ProgramNode};
pub use closure::{fl_closure, set_size};
pub use nnf::{is_nnf, negate_nnf, to_nnf};
pub use parse::{parse_assertion, parse_formula, ParseError};
