//! Pretty-printing in the concrete grammar. `parse(print(f))` reparses to an
//! equal term; parentheses are inserted exactly where precedence demands.

use std::fmt;

use super::ast::{Assertion, Formula, FormulaNode, Item, Program, ProgramNode};

// Formula precedence levels, loosest first.
const P_IMPLIES: u8 = 0;
const P_OR: u8 = 1;
const P_AND: u8 = 2;
const P_UNARY: u8 = 3;

// Program precedence levels.
const Q_UNION: u8 = 0;
const Q_SEQ: u8 = 1;
const Q_POSTFIX: u8 = 2;

fn fmt_formula(f: &Formula, ctx: u8, out: &mut fmt::Formatter<'_>) -> fmt::Result {
    let prec = match f.node() {
        FormulaNode::Implies(..) => P_IMPLIES,
        FormulaNode::Or(..) => P_OR,
        FormulaNode::And(..) => P_AND,
        _ => P_UNARY,
    };
    let parens = prec < ctx;
    if parens {
        out.write_str("(")?;
    }
    match f.node() {
        FormulaNode::Top => out.write_str("true")?,
        FormulaNode::Bottom => out.write_str("false")?,
        FormulaNode::Prop(name) => write!(out, "{name}")?,
        FormulaNode::Not(body) => {
            out.write_str("~")?;
            fmt_formula(body, P_UNARY, out)?;
        }
        FormulaNode::And(l, r) => {
            fmt_formula(l, P_AND, out)?;
            out.write_str(" & ")?;
            fmt_formula(r, P_AND + 1, out)?;
        }
        FormulaNode::Or(l, r) => {
            fmt_formula(l, P_OR, out)?;
            out.write_str(" | ")?;
            fmt_formula(r, P_OR + 1, out)?;
        }
        FormulaNode::Implies(l, r) => {
            fmt_formula(l, P_IMPLIES + 1, out)?;
            out.write_str(" -> ")?;
            fmt_formula(r, P_IMPLIES, out)?;
        }
        FormulaNode::Diamond(p, body) => {
            out.write_str("<")?;
            fmt_program(p, Q_UNION, out)?;
            out.write_str(">")?;
            fmt_formula(body, P_UNARY, out)?;
        }
        FormulaNode::Box(p, body) => {
            out.write_str("[")?;
            fmt_program(p, Q_UNION, out)?;
            out.write_str("]")?;
            fmt_formula(body, P_UNARY, out)?;
        }
    }
    if parens {
        out.write_str(")")?;
    }
    Ok(())
}

fn fmt_program(p: &Program, ctx: u8, out: &mut fmt::Formatter<'_>) -> fmt::Result {
    let prec = match p.node() {
        ProgramNode::Union(..) => Q_UNION,
        ProgramNode::Seq(..) => Q_SEQ,
        _ => Q_POSTFIX,
    };
    let parens = prec < ctx;
    if parens {
        out.write_str("(")?;
    }
    match p.node() {
        ProgramNode::Atomic(name) => write!(out, "{name}")?,
        ProgramNode::Seq(l, r) => {
            fmt_program(l, Q_SEQ, out)?;
            out.write_str(";")?;
            fmt_program(r, Q_SEQ + 1, out)?;
        }
        ProgramNode::Union(l, r) => {
            fmt_program(l, Q_UNION, out)?;
            out.write_str(" + ")?;
            fmt_program(r, Q_UNION + 1, out)?;
        }
        ProgramNode::Star(body) => {
            fmt_program(body, Q_POSTFIX, out)?;
            out.write_str("*")?;
        }
        ProgramNode::Test(cond) => {
            // A test condition below unary precedence needs parentheses so
            // the `?` reattaches to the whole condition on reparse.
            fmt_formula(cond, P_UNARY, out)?;
            out.write_str("?")?;
        }
    }
    if parens {
        out.write_str(")")?;
    }
    Ok(())
}

impl fmt::Display for Formula {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_formula(self, P_IMPLIES, out)
    }
}

impl fmt::Display for Program {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_program(self, Q_UNION, out)
    }
}

impl fmt::Display for Assertion {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Assertion::Concept(var, f) => write!(out, "{var} : {f}"),
            Assertion::Role(prog, from, to) => write!(out, "{prog}({from},{to})"),
        }
    }
}

impl fmt::Display for Item {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Item::Formula(f) => write!(out, "{f}"),
            Item::Assertion(a) => write!(out, "{a}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::parse::parse_formula;

    fn roundtrip(text: &str) {
        let f = parse_formula(text).unwrap();
        let printed = f.to_string();
        let again = parse_formula(&printed).unwrap();
        assert_eq!(f, again, "print was `{printed}`");
    }

    #[test]
    fn prints_minimal_parens() {
        let f = parse_formula("(p -> q) -> r").unwrap();
        assert_eq!(f.to_string(), "(p -> q) -> r");
        let g = parse_formula("p | q & r").unwrap();
        assert_eq!(g.to_string(), "p | q & r");
        let h = parse_formula("<s;t*>~p").unwrap();
        assert_eq!(h.to_string(), "<s;t*>~p");
    }

    #[test]
    fn roundtrips() {
        for text in [
            "p",
            "~(p & q)",
            "p & (q & r)",
            "(p & q) & r",
            "[s](p | q) -> <t>false",
            "<(p & q)?>r",
            "[(s+t);(u*)]p",
            "<(p?)*>q",
            "<p?;q?;s>r",
            "~~p",
        ] {
            roundtrip(text);
        }
    }
}
