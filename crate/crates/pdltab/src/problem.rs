//! Problem files: a `goal:`/`assume:` pair for formula problems, or an
//! `abox:`/`assume:` pair for ABox problems, one item per line, `#` comments.
//! A single file never mixes `goal:` and `abox:` sections.

use std::fmt;

use thiserror::Error;

use crate::syntax::{parse_assertion, parse_formula, Assertion, Formula, ParseError};

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ProblemFile {
    pub formulas: Vec<Formula>,
    pub assumptions: Vec<Formula>,
    pub assertions: Vec<Assertion>,
}

impl ProblemFile {
    pub fn is_abox(&self) -> bool {
        !self.assertions.is_empty()
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum ProblemError {
    #[error("{file}:{line}:{col}: {message}")]
    Syntax {
        file: String,
        line: usize,
        col: usize,
        message: String,
    },
    #[error("{file}:{line}: {message}")]
    Structure {
        file: String,
        line: usize,
        message: String,
    },
}

impl ProblemError {
    fn from_parse(file: &str, line_offset: usize, e: ParseError) -> ProblemError {
        ProblemError::Syntax {
            file: file.to_string(),
            line: line_offset + e.line,
            col: e.col,
            message: e.message,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Section {
    None,
    Goal,
    Assume,
    Abox,
}

impl fmt::Display for Section {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Section::None => "none",
            Section::Goal => "goal",
            Section::Assume => "assume",
            Section::Abox => "abox",
        })
    }
}

/// Parse problem-file text. `file` is used in diagnostics only.
pub fn parse_problem(file: &str, text: &str) -> Result<ProblemFile, ProblemError> {
    let mut out = ProblemFile::default();
    let mut section = Section::None;
    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = match raw.split_once('#') {
            Some((head, _)) => head.trim(),
            None => raw.trim(),
        };
        if line.is_empty() {
            continue;
        }
        match line {
            "goal:" => {
                section = Section::Goal;
                continue;
            }
            "assume:" => {
                section = Section::Assume;
                continue;
            }
            "abox:" => {
                section = Section::Abox;
                continue;
            }
            _ => {}
        }
        match section {
            Section::None => {
                return Err(ProblemError::Structure {
                    file: file.to_string(),
                    line: lineno,
                    message: format!(
                        "expected a section header (`goal:`, `assume:`, or `abox:`), found `{line}`"
                    ),
                });
            }
            Section::Goal => out
                .formulas
                .push(parse_formula(line).map_err(|e| ProblemError::from_parse(file, idx, e))?),
            Section::Assume => out
                .assumptions
                .push(parse_formula(line).map_err(|e| ProblemError::from_parse(file, idx, e))?),
            Section::Abox => out
                .assertions
                .push(parse_assertion(line).map_err(|e| ProblemError::from_parse(file, idx, e))?),
        }
    }
    if !out.formulas.is_empty() && !out.assertions.is_empty() {
        return Err(ProblemError::Structure {
            file: file.to_string(),
            line: 1,
            message: "a file holds either a `goal:` or an `abox:` section, never both".into(),
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_formula_problem() {
        let text = "# the star example\ngoal:\n  <s*>p\n  [s*]q\nassume:\n  ~p | ~q\n";
        let p = parse_problem("test.pdl", text).unwrap();
        assert_eq!(p.formulas.len(), 2);
        assert_eq!(p.assumptions.len(), 1);
        assert!(!p.is_abox());
    }

    #[test]
    fn parses_abox_problem() {
        let text = "abox:\n  a : [s]<s*>p\n  s(a,b)\n";
        let p = parse_problem("kb.pdl", text).unwrap();
        assert_eq!(p.assertions.len(), 2);
        assert!(p.is_abox());
    }

    #[test]
    fn rejects_mixed_files() {
        let text = "goal:\n p\nabox:\n a : p\n";
        assert!(matches!(
            parse_problem("x.pdl", text),
            Err(ProblemError::Structure { .. })
        ));
    }

    #[test]
    fn syntax_errors_carry_file_and_line() {
        let text = "goal:\n p &\n";
        match parse_problem("bad.pdl", text) {
            Err(ProblemError::Syntax { file, line, .. }) => {
                assert_eq!(file, "bad.pdl");
                assert_eq!(line, 2);
            }
            other => panic!("expected syntax error, got {other:?}"),
        }
    }

    #[test]
    fn items_outside_sections_are_rejected() {
        assert!(matches!(
            parse_problem("x.pdl", "p | q\n"),
            Err(ProblemError::Structure { line: 1, .. })
        ));
    }
}
