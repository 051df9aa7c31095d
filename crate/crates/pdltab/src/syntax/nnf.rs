//! Negation normal form: implication eliminated, negation only immediately
//! before propositions. Test conditions inside programs are normalised too,
//! since the tableau rules move them (or their negations) into node labels.

use super::ast::{Formula, FormulaNode, Program, ProgramNode};

/// True iff the formula is in NNF, including every test condition nested in
/// its programs.
pub fn is_nnf(f: &Formula) -> bool {
    match f.node() {
        FormulaNode::Top | FormulaNode::Bottom | FormulaNode::Prop(_) => true,
        FormulaNode::Not(body) => matches!(body.node(), FormulaNode::Prop(_)),
        FormulaNode::And(l, r) | FormulaNode::Or(l, r) => is_nnf(l) && is_nnf(r),
        FormulaNode::Implies(..) => false,
        FormulaNode::Diamond(p, body) | FormulaNode::Box(p, body) => {
            program_is_nnf(p) && is_nnf(body)
        }
    }
}

fn program_is_nnf(p: &Program) -> bool {
    match p.node() {
        ProgramNode::Atomic(_) => true,
        ProgramNode::Seq(l, r) | ProgramNode::Union(l, r) => program_is_nnf(l) && program_is_nnf(r),
        ProgramNode::Star(body) => program_is_nnf(body),
        ProgramNode::Test(cond) => is_nnf(cond),
    }
}

/// Convert to an equivalent formula in NNF.
pub fn to_nnf(f: &Formula) -> Formula {
    nnf_pos(f)
}

fn nnf_pos(f: &Formula) -> Formula {
    match f.node() {
        FormulaNode::Top | FormulaNode::Bottom => f.clone(),
        FormulaNode::Prop(_) => f.clone(),
        FormulaNode::Not(body) => nnf_neg(body),
        FormulaNode::And(l, r) => Formula::and(nnf_pos(l), nnf_pos(r)),
        FormulaNode::Or(l, r) => Formula::or(nnf_pos(l), nnf_pos(r)),
        FormulaNode::Implies(l, r) => Formula::or(nnf_neg(l), nnf_pos(r)),
        FormulaNode::Diamond(p, body) => Formula::diamond(nnf_program(p), nnf_pos(body)),
        FormulaNode::Box(p, body) => Formula::boxed(nnf_program(p), nnf_pos(body)),
    }
}

fn nnf_neg(f: &Formula) -> Formula {
    match f.node() {
        FormulaNode::Top => Formula::bottom(),
        FormulaNode::Bottom => Formula::top(),
        FormulaNode::Prop(_) => Formula::not(f.clone()),
        FormulaNode::Not(body) => nnf_pos(body),
        FormulaNode::And(l, r) => Formula::or(nnf_neg(l), nnf_neg(r)),
        FormulaNode::Or(l, r) => Formula::and(nnf_neg(l), nnf_neg(r)),
        FormulaNode::Implies(l, r) => Formula::and(nnf_pos(l), nnf_neg(r)),
        FormulaNode::Diamond(p, body) => Formula::boxed(nnf_program(p), nnf_neg(body)),
        FormulaNode::Box(p, body) => Formula::diamond(nnf_program(p), nnf_neg(body)),
    }
}

fn nnf_program(p: &Program) -> Program {
    match p.node() {
        ProgramNode::Atomic(_) => p.clone(),
        ProgramNode::Seq(l, r) => Program::seq(nnf_program(l), nnf_program(r)),
        ProgramNode::Union(l, r) => Program::union(nnf_program(l), nnf_program(r)),
        ProgramNode::Star(body) => Program::star(nnf_program(body)),
        ProgramNode::Test(cond) => Program::test(nnf_pos(cond)),
    }
}

/// The NNF of the negation of an NNF formula (written `phi-bar`). An
/// involution on NNF formulas; programs are left untouched.
///
/// Panics if the input is not in NNF.
pub fn negate_nnf(f: &Formula) -> Formula {
    match f.node() {
        FormulaNode::Top => Formula::bottom(),
        FormulaNode::Bottom => Formula::top(),
        FormulaNode::Prop(_) => Formula::not(f.clone()),
        FormulaNode::Not(body) => match body.node() {
            FormulaNode::Prop(_) => body.clone(),
            _ => panic!("negate_nnf: input not in NNF: {f}"),
        },
        FormulaNode::And(l, r) => Formula::or(negate_nnf(l), negate_nnf(r)),
        FormulaNode::Or(l, r) => Formula::and(negate_nnf(l), negate_nnf(r)),
        FormulaNode::Implies(..) => panic!("negate_nnf: input not in NNF: {f}"),
        FormulaNode::Diamond(p, body) => Formula::boxed(p.clone(), negate_nnf(body)),
        FormulaNode::Box(p, body) => Formula::diamond(p.clone(), negate_nnf(body)),
    }
}

#[cfg(test)]
mod tests {
    use super::super::parse::parse_formula;
    use super::*;

    fn nnf_of(text: &str) -> String {
        to_nnf(&parse_formula(text).unwrap()).to_string()
    }

    #[test]
    fn de_morgan_and_modal_duality() {
        assert_eq!(nnf_of("~(p & <s>q)"), "~p | [s]~q");
        assert_eq!(nnf_of("~[s*]p"), "<s*>~p");
        assert_eq!(nnf_of("p -> q"), "~p | q");
    }

    #[test]
    fn constants_under_negation() {
        assert_eq!(nnf_of("~true"), "false");
        assert_eq!(nnf_of("~false"), "true");
    }

    #[test]
    fn test_conditions_are_normalised() {
        let f = parse_formula("<(p -> q)?>r").unwrap();
        assert!(!is_nnf(&f));
        let g = to_nnf(&f);
        assert!(is_nnf(&g));
        assert_eq!(g.to_string(), "<(~p | q)?>r");
    }

    #[test]
    fn negate_nnf_examples() {
        let neg = |t: &str| negate_nnf(&parse_formula(t).unwrap()).to_string();
        assert_eq!(neg("p"), "~p");
        assert_eq!(neg("<s>p"), "[s]~p");
        assert_eq!(neg("p & q"), "~p | ~q");
    }

    #[test]
    #[should_panic(expected = "not in NNF")]
    fn negate_nnf_rejects_non_nnf() {
        negate_nnf(&parse_formula("p -> q").unwrap());
    }
}
