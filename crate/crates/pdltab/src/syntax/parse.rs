//! Recursive-descent parser for the concrete formula/program/assertion
//! grammar.
//!
//! Precedence, tightest first: unary (`~`, modalities, postfix `*`), `;`,
//! `+`, `&`, `|`, `->` (right associative). `#` starts a line comment.

use std::fmt;

use thiserror::Error;

use super::ast::{Assertion, Formula, Ident, Program};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
#[error("{line}:{col}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

impl ParseError {
    fn new(pos: Pos, message: impl Into<String>) -> ParseError {
        ParseError {
            line: pos.line,
            col: pos.col,
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Pos {
    line: usize,
    col: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    True,
    False,
    Tilde,
    Amp,
    Pipe,
    Arrow,
    Lt,
    Gt,
    LBrack,
    RBrack,
    LParen,
    RParen,
    Semi,
    Plus,
    Star,
    Question,
    Colon,
    Comma,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Tok::Ident(name) => return write!(f, "identifier `{name}`"),
            Tok::True => "`true`",
            Tok::False => "`false`",
            Tok::Tilde => "`~`",
            Tok::Amp => "`&`",
            Tok::Pipe => "`|`",
            Tok::Arrow => "`->`",
            Tok::Lt => "`<`",
            Tok::Gt => "`>`",
            Tok::LBrack => "`[`",
            Tok::RBrack => "`]`",
            Tok::LParen => "`(`",
            Tok::RParen => "`)`",
            Tok::Semi => "`;`",
            Tok::Plus => "`+`",
            Tok::Star => "`*`",
            Tok::Question => "`?`",
            Tok::Colon => "`:`",
            Tok::Comma => "`,`",
            Tok::Eof => "end of input",
        };
        f.write_str(s)
    }
}

fn lex(text: &str) -> Result<Vec<(Tok, Pos)>, ParseError> {
    let mut toks = Vec::new();
    let mut line = 1usize;
    let mut col = 1usize;
    let mut chars = text.chars().peekable();
    while let Some(&c) = chars.peek() {
        let pos = Pos { line, col };
        match c {
            '\n' => {
                chars.next();
                line += 1;
                col = 1;
            }
            c if c.is_whitespace() => {
                chars.next();
                col += 1;
            }
            '#' => {
                while let Some(&c) = chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    chars.next();
                    col += 1;
                }
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut name = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_ascii_alphanumeric() || c == '_' {
                        name.push(c);
                        chars.next();
                        col += 1;
                    } else {
                        break;
                    }
                }
                let tok = match name.as_str() {
                    "true" => Tok::True,
                    "false" => Tok::False,
                    _ => Tok::Ident(name),
                };
                toks.push((tok, pos));
            }
            '-' => {
                chars.next();
                col += 1;
                if chars.peek() == Some(&'>') {
                    chars.next();
                    col += 1;
                    toks.push((Tok::Arrow, pos));
                } else {
                    return Err(ParseError::new(pos, "expected `->`"));
                }
            }
            _ => {
                let tok = match c {
                    '~' => Tok::Tilde,
                    '&' => Tok::Amp,
                    '|' => Tok::Pipe,
                    '<' => Tok::Lt,
                    '>' => Tok::Gt,
                    '[' => Tok::LBrack,
                    ']' => Tok::RBrack,
                    '(' => Tok::LParen,
                    ')' => Tok::RParen,
                    ';' => Tok::Semi,
                    '+' => Tok::Plus,
                    '*' => Tok::Star,
                    '?' => Tok::Question,
                    ':' => Tok::Colon,
                    ',' => Tok::Comma,
                    _ => return Err(ParseError::new(pos, format!("unexpected character `{c}`"))),
                };
                chars.next();
                col += 1;
                toks.push((tok, pos));
            }
        }
    }
    toks.push((Tok::Eof, Pos { line, col }));
    Ok(toks)
}

struct Parser {
    toks: Vec<(Tok, Pos)>,
    at: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> Pos {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].0.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == tok {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: Tok) -> Result<(), ParseError> {
        if self.peek() == &tok {
            self.bump();
            Ok(())
        } else {
            Err(ParseError::new(
                self.pos(),
                format!("expected {tok}, found {}", self.peek()),
            ))
        }
    }

    fn formula(&mut self) -> Result<Formula, ParseError> {
        let left = self.or_level()?;
        if self.eat(&Tok::Arrow) {
            let right = self.formula()?;
            Ok(Formula::implies(left, right))
        } else {
            Ok(left)
        }
    }

    fn or_level(&mut self) -> Result<Formula, ParseError> {
        let mut f = self.and_level()?;
        while self.eat(&Tok::Pipe) {
            let rhs = self.and_level()?;
            f = Formula::or(f, rhs);
        }
        Ok(f)
    }

    fn and_level(&mut self) -> Result<Formula, ParseError> {
        let mut f = self.unary()?;
        while self.eat(&Tok::Amp) {
            let rhs = self.unary()?;
            f = Formula::and(f, rhs);
        }
        Ok(f)
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        match self.peek() {
            Tok::Tilde => {
                self.bump();
                Ok(Formula::not(self.unary()?))
            }
            Tok::Lt => {
                self.bump();
                let prog = self.program()?;
                self.expect(Tok::Gt)?;
                Ok(Formula::diamond(prog, self.unary()?))
            }
            Tok::LBrack => {
                self.bump();
                let prog = self.program()?;
                self.expect(Tok::RBrack)?;
                Ok(Formula::boxed(prog, self.unary()?))
            }
            Tok::True => {
                self.bump();
                Ok(Formula::top())
            }
            Tok::False => {
                self.bump();
                Ok(Formula::bottom())
            }
            Tok::Ident(_) => {
                if let Tok::Ident(name) = self.bump() {
                    Ok(Formula::prop(name.as_str()))
                } else {
                    unreachable!()
                }
            }
            Tok::LParen => {
                self.bump();
                let f = self.formula()?;
                self.expect(Tok::RParen)?;
                Ok(f)
            }
            other => Err(ParseError::new(
                self.pos(),
                format!("expected a formula, found {other}"),
            )),
        }
    }

    fn program(&mut self) -> Result<Program, ParseError> {
        let mut p = self.seq_level()?;
        while self.eat(&Tok::Plus) {
            let rhs = self.seq_level()?;
            p = Program::union(p, rhs);
        }
        Ok(p)
    }

    fn seq_level(&mut self) -> Result<Program, ParseError> {
        let mut p = self.postfix()?;
        while self.eat(&Tok::Semi) {
            let rhs = self.postfix()?;
            p = Program::seq(p, rhs);
        }
        Ok(p)
    }

    fn postfix(&mut self) -> Result<Program, ParseError> {
        let mut p = self.program_atom()?;
        while self.eat(&Tok::Star) {
            p = Program::star(p);
        }
        Ok(p)
    }

    // A program atom is an atomic symbol, a parenthesised program, or a test
    // `formula?`. Both formulas and programs may start with `(` or an
    // identifier, so try the formula reading first and backtrack.
    fn program_atom(&mut self) -> Result<Program, ParseError> {
        let save = self.at;
        match self.formula() {
            Ok(f) => {
                if self.eat(&Tok::Question) {
                    return Ok(Program::test(f));
                }
                if let super::ast::FormulaNode::Prop(name) = f.node() {
                    return Ok(Program::atomic(name.clone()));
                }
                let err = ParseError::new(self.pos(), "expected `?` after test formula");
                self.at = save;
                if self.peek() == &Tok::LParen {
                    self.bump();
                    let p = self.program()?;
                    self.expect(Tok::RParen)?;
                    Ok(p)
                } else {
                    Err(err)
                }
            }
            Err(err) => {
                self.at = save;
                if self.peek() == &Tok::LParen {
                    self.bump();
                    let p = self.program()?;
                    self.expect(Tok::RParen)?;
                    Ok(p)
                } else {
                    Err(err)
                }
            }
        }
    }

    fn assertion(&mut self) -> Result<Assertion, ParseError> {
        let name = match self.bump() {
            Tok::Ident(name) => name,
            other => {
                return Err(ParseError::new(
                    self.pos(),
                    format!("expected an identifier, found {other}"),
                ))
            }
        };
        match self.peek() {
            Tok::Colon => {
                self.bump();
                let f = self.formula()?;
                Ok(Assertion::Concept(Ident::new(&name), f))
            }
            Tok::LParen => {
                self.bump();
                let from = match self.bump() {
                    Tok::Ident(v) => v,
                    other => {
                        return Err(ParseError::new(
                            self.pos(),
                            format!("expected a state variable, found {other}"),
                        ))
                    }
                };
                self.expect(Tok::Comma)?;
                let to = match self.bump() {
                    Tok::Ident(v) => v,
                    other => {
                        return Err(ParseError::new(
                            self.pos(),
                            format!("expected a state variable, found {other}"),
                        ))
                    }
                };
                self.expect(Tok::RParen)?;
                Ok(Assertion::role(name.as_str(), from.as_str(), to.as_str()))
            }
            other => Err(ParseError::new(
                self.pos(),
                format!("expected `:` or `(` in assertion, found {other}"),
            )),
        }
    }

    fn finish<T>(&mut self, value: T) -> Result<T, ParseError> {
        if self.peek() == &Tok::Eof {
            Ok(value)
        } else {
            Err(ParseError::new(
                self.pos(),
                format!("unexpected {} after input", self.peek()),
            ))
        }
    }
}

/// Parse a single formula from UTF-8 text.
pub fn parse_formula(text: &str) -> Result<Formula, ParseError> {
    let mut p = Parser {
        toks: lex(text)?,
        at: 0,
    };
    let f = p.formula()?;
    p.finish(f)
}

/// Parse a single ABox assertion: `a : <formula>` or `<prog>(<a>,<b>)`.
pub fn parse_assertion(text: &str) -> Result<Assertion, ParseError> {
    let mut p = Parser {
        toks: lex(text)?,
        at: 0,
    };
    let a = p.assertion()?;
    p.finish(a)
}
