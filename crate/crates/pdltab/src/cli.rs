//! Command-line front end: `sat`, `absat`, `instance`, and `oracle`
//! subcommands over problem files, with DOT export, model extraction, and a
//! machine-readable JSON result record.
//!
//! Exit codes: 10 for positive verdicts (SAT / ENTAILED / a model found),
//! 20 for negative ones, 1 for usage or input errors, 2 for the node cap.

use std::fs;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::decision::{
    check_abox_sat, check_abox_sat_backtracking, check_sat, instance_check, Encoding, SolveError,
    Stats, Verdict,
};
use crate::graph::{AndOrGraph, SolveConfig};
use crate::problem::{parse_problem, ProblemFile};
use crate::semantics::{bounded_model_sat, extract_model, Signature};
use crate::syntax::{parse_formula, to_nnf, Assertion, Formula, Ident};
use crate::ProblemInput;

pub const EXIT_POSITIVE: i32 = 10;
pub const EXIT_NEGATIVE: i32 = 20;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_RESOURCE: i32 = 2;

#[derive(Parser)]
#[command(
    name = "pdltab",
    version,
    about = "Tableau reasoner for propositional dynamic logic"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check satisfiability of a formula problem (goal w.r.t. assumptions)
    Sat {
        /// Problem file with `goal:` and optional `assume:` sections
        input: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Check consistency of an ABox w.r.t. a TBox
    Absat {
        /// Problem file with an `abox:` section
        abox: PathBuf,
        /// Problem file with an `assume:` section
        tbox: PathBuf,
        #[arg(long, value_enum, default_value_t = Algorithm::Backtrack)]
        algorithm: Algorithm,
        #[command(flatten)]
        common: Common,
    },
    /// Check whether a formula holds of an individual in every model
    Instance {
        abox: PathBuf,
        tbox: PathBuf,
        /// State variable to check
        #[arg(long)]
        var: String,
        /// Formula to check (full syntax, normalised internally)
        #[arg(long)]
        formula: String,
        #[arg(long, value_enum, default_value_t = EncodingArg::Direct)]
        encoding: EncodingArg,
        #[command(flatten)]
        common: Common,
    },
    /// Search exhaustively for a small model (never proves unsatisfiability)
    Oracle {
        input: PathBuf,
        /// State budget, at most 4
        #[arg(long, default_value_t = 3)]
        max_states: usize,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Algorithm {
    /// Globally cache complex and simple nodes
    Cached,
    /// Backtrack over complex or-branchings, cache simple nodes
    Backtrack,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum EncodingArg {
    Direct,
    FreshProp,
}

#[derive(Args)]
struct Common {
    /// Write the and-or graph in DOT format
    #[arg(long)]
    dot: Option<PathBuf>,
    /// On a positive verdict, write the extracted Kripke model
    #[arg(long = "extract-model")]
    extract_model: Option<PathBuf>,
    /// Print one JSON object instead of text
    #[arg(long)]
    json: bool,
    /// Node cap for graph construction
    #[arg(long, default_value_t = 1_000_000)]
    max_nodes: usize,
    /// Print only the verdict line
    #[arg(long)]
    quiet: bool,
}

impl Common {
    fn config(&self) -> SolveConfig {
        SolveConfig {
            max_nodes: self.max_nodes,
        }
    }
}

struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn error(message: impl Into<String>) -> Failure {
        Failure {
            code: EXIT_ERROR,
            message: message.into(),
        }
    }
}

impl From<SolveError> for Failure {
    fn from(e: SolveError) -> Failure {
        Failure {
            code: EXIT_RESOURCE,
            message: e.to_string(),
        }
    }
}

impl From<crate::problem::ProblemError> for Failure {
    fn from(e: crate::problem::ProblemError) -> Failure {
        Failure::error(e.to_string())
    }
}

/// Entry point used by the binary; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => EXIT_ERROR,
            };
            let _ = e.print();
            return code;
        }
    };
    let result = match cli.cmd {
        Cmd::Sat { input, common } => cmd_sat(&input, &common),
        Cmd::Absat {
            abox,
            tbox,
            algorithm,
            common,
        } => cmd_absat(&abox, &tbox, algorithm, &common),
        Cmd::Instance {
            abox,
            tbox,
            var,
            formula,
            encoding,
            common,
        } => cmd_instance(&abox, &tbox, &var, &formula, encoding, &common),
        Cmd::Oracle {
            input,
            max_states,
            common,
        } => cmd_oracle(&input, max_states, &common),
    };
    match result {
        Ok(code) => code,
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            failure.code
        }
    }
}

fn load_problem(path: &Path) -> Result<ProblemFile, Failure> {
    let text =
        fs::read_to_string(path).map_err(|e| Failure::error(format!("{}: {e}", path.display())))?;
    Ok(parse_problem(&path.display().to_string(), &text)?)
}

fn load_formula_problem(path: &Path) -> Result<(Vec<Formula>, Vec<Formula>), Failure> {
    let p = load_problem(path)?;
    if p.is_abox() {
        return Err(Failure::error(format!(
            "{}: expected a formula problem, found an `abox:` section",
            path.display()
        )));
    }
    let x = p.formulas.iter().map(to_nnf).collect();
    let gamma = p.assumptions.iter().map(to_nnf).collect();
    Ok((x, gamma))
}

fn load_abox_problem(
    abox_path: &Path,
    tbox_path: &Path,
) -> Result<(Vec<Assertion>, Vec<Formula>), Failure> {
    let a = load_problem(abox_path)?;
    if !a.formulas.is_empty() {
        return Err(Failure::error(format!(
            "{}: expected an ABox problem, found a `goal:` section",
            abox_path.display()
        )));
    }
    if a.assertions.is_empty() {
        return Err(Failure::error(format!(
            "{}: the `abox:` section is missing or empty",
            abox_path.display()
        )));
    }
    let t = load_problem(tbox_path)?;
    if !t.formulas.is_empty() || !t.assertions.is_empty() {
        return Err(Failure::error(format!(
            "{}: a TBox file holds only an `assume:` section",
            tbox_path.display()
        )));
    }
    let assertions = a
        .assertions
        .iter()
        .map(|assertion| match assertion {
            Assertion::Concept(v, f) => Assertion::Concept(v.clone(), to_nnf(f)),
            role => role.clone(),
        })
        .collect();
    let gamma = a
        .assumptions
        .iter()
        .chain(t.assumptions.iter())
        .map(to_nnf)
        .collect();
    Ok((assertions, gamma))
}

fn report(
    common: &Common,
    verdict_line: &str,
    algorithm: &str,
    stats: &Stats,
    positive: bool,
) -> i32 {
    if common.json {
        let record = serde_json::json!({
            "verdict": verdict_line,
            "algorithm": algorithm,
            "nodes": stats.nodes,
            "iterations": stats.iterations,
            "millis": stats.millis,
        });
        println!("{record}");
    } else {
        println!("{verdict_line}");
        if !common.quiet {
            println!(
                "algorithm={} nodes={} iterations={} millis={}",
                algorithm, stats.nodes, stats.iterations, stats.millis
            );
        }
    }
    if positive {
        EXIT_POSITIVE
    } else {
        EXIT_NEGATIVE
    }
}

fn write_artifacts(
    common: &Common,
    graph: &AndOrGraph,
    verdict: &Verdict,
    input: &ProblemInput,
    gamma: &[Formula],
) -> Result<(), Failure> {
    if let Some(path) = &common.dot {
        fs::write(path, graph.to_dot())
            .map_err(|e| Failure::error(format!("{}: {e}", path.display())))?;
    }
    if let Some(path) = &common.extract_model {
        match &verdict.witness {
            Some(marking) => {
                let (_, model) = extract_model(graph, marking, input, gamma)
                    .map_err(|e| Failure::error(e.to_string()))?;
                fs::write(path, model.to_string())
                    .map_err(|e| Failure::error(format!("{}: {e}", path.display())))?;
            }
            None => {
                if !common.quiet {
                    eprintln!("no model to extract: the problem is unsatisfiable");
                }
            }
        }
    }
    Ok(())
}

fn cmd_sat(input: &Path, common: &Common) -> Result<i32, Failure> {
    let (x, gamma) = load_formula_problem(input)?;
    let (verdict, graph) = check_sat(&x, &gamma, &common.config())?;
    write_artifacts(common, &graph, &verdict, &ProblemInput::Formulas(x), &gamma)?;
    let line = if verdict.satisfiable { "SAT" } else { "UNSAT" };
    Ok(report(
        common,
        line,
        "global-caching",
        &verdict.stats,
        verdict.satisfiable,
    ))
}

fn cmd_absat(
    abox: &Path,
    tbox: &Path,
    algorithm: Algorithm,
    common: &Common,
) -> Result<i32, Failure> {
    let (a, gamma) = load_abox_problem(abox, tbox)?;
    let (name, (verdict, graph)) = match algorithm {
        Algorithm::Cached => ("abox-cached", check_abox_sat(&a, &gamma, &common.config())?),
        Algorithm::Backtrack => (
            "abox-backtrack",
            check_abox_sat_backtracking(&a, &gamma, &common.config())?,
        ),
    };
    write_artifacts(common, &graph, &verdict, &ProblemInput::Abox(a), &gamma)?;
    let line = if verdict.satisfiable { "SAT" } else { "UNSAT" };
    Ok(report(
        common,
        line,
        name,
        &verdict.stats,
        verdict.satisfiable,
    ))
}

fn warn_unused_artifacts(common: &Common, command: &str) {
    if (common.dot.is_some() || common.extract_model.is_some()) && !common.quiet {
        eprintln!("note: --dot and --extract-model have no effect for `{command}`");
    }
}

fn cmd_instance(
    abox: &Path,
    tbox: &Path,
    var: &str,
    formula: &str,
    encoding: EncodingArg,
    common: &Common,
) -> Result<i32, Failure> {
    warn_unused_artifacts(common, "instance");
    let (a, gamma) = load_abox_problem(abox, tbox)?;
    let phi = parse_formula(formula).map_err(|e| Failure::error(format!("--formula: {e}")))?;
    let (encoding, name) = match encoding {
        EncodingArg::Direct => (Encoding::Direct, "instance-direct"),
        EncodingArg::FreshProp => (Encoding::FreshProp, "instance-fresh-prop"),
    };
    let (entailed, stats) = instance_check(
        &a,
        &gamma,
        &phi,
        &Ident::new(var),
        encoding,
        &common.config(),
    )?;
    let line = if entailed { "ENTAILED" } else { "NOT ENTAILED" };
    Ok(report(common, line, name, &stats, entailed))
}

fn cmd_oracle(input: &Path, max_states: usize, common: &Common) -> Result<i32, Failure> {
    warn_unused_artifacts(common, "oracle");
    if max_states > 4 {
        return Err(Failure::error("--max-states is at most 4"));
    }
    let p = load_problem(input)?;
    let (problem, gamma): (ProblemInput, Vec<Formula>) = if p.is_abox() {
        let assertions = p
            .assertions
            .iter()
            .map(|assertion| match assertion {
                Assertion::Concept(v, f) => Assertion::Concept(v.clone(), to_nnf(f)),
                role => role.clone(),
            })
            .collect();
        (
            ProblemInput::Abox(assertions),
            p.assumptions.iter().map(to_nnf).collect(),
        )
    } else {
        (
            ProblemInput::Formulas(p.formulas.iter().map(to_nnf).collect()),
            p.assumptions.iter().map(to_nnf).collect(),
        )
    };
    let sig = Signature::from_problem(&problem, &gamma);
    let found = bounded_model_sat(&problem, &gamma, max_states, &sig)
        .map_err(|e| Failure::error(e.to_string()))?;
    let line = if found {
        format!("SAT(\u{2264}{max_states})")
    } else {
        format!("NO-MODEL(\u{2264}{max_states})")
    };
    Ok(report(
        common,
        &line,
        "bounded-oracle",
        &Stats::default(),
        found,
    ))
}
