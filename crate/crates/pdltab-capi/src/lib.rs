//! C ABI over the reasoner: build a problem through an opaque handle, run a
//! check, read the verdict and counters off an opaque result. Every fallible
//! call returns a status code; the last failure message is kept per thread
//! and exposed through [`pdltab_last_error`].
//!
//! The matching declarations live in `include/pdltab.h`, which is maintained
//! by hand and kept in sync by the `header` test.

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use pdltab::decision::{
    check_abox_sat, check_abox_sat_backtracking, check_sat, instance_check, Encoding, SolveError,
};
use pdltab::graph::SolveConfig;
use pdltab::semantics::extract_model;
use pdltab::syntax::{parse_assertion, parse_formula, to_nnf, Assertion, Formula, Ident};
use pdltab::ProblemInput;

pub const PDLTAB_OK: c_int = 0;
pub const PDLTAB_ERR_NULL: c_int = 1;
pub const PDLTAB_ERR_UTF8: c_int = 2;
pub const PDLTAB_ERR_PARSE: c_int = 3;
pub const PDLTAB_ERR_KIND: c_int = 4;
pub const PDLTAB_ERR_LIMIT: c_int = 5;
pub const PDLTAB_ERR_ARG: c_int = 6;
pub const PDLTAB_ERR_INTERNAL: c_int = 7;

pub const PDLTAB_ALG_CACHED: c_int = 0;
pub const PDLTAB_ALG_BACKTRACK: c_int = 1;

pub const PDLTAB_ENC_DIRECT: c_int = 0;
pub const PDLTAB_ENC_FRESH_PROP: c_int = 1;

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: &str) {
    let sanitized = message.replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).unwrap_or_default();
    });
}

fn fail(code: c_int, message: &str) -> c_int {
    set_error(message);
    code
}

/// A problem under construction: goal formulas, global assumptions, and ABox
/// assertions. Opaque to C.
pub struct PdltabProblem {
    goals: Vec<Formula>,
    assumptions: Vec<Formula>,
    assertions: Vec<Assertion>,
    max_nodes: usize,
}

/// The outcome of a check. Opaque to C.
pub struct PdltabResult {
    verdict: bool,
    nodes: u64,
    iterations: u64,
    millis: u64,
    model: Option<CString>,
}

/// Guard against panics crossing the FFI boundary.
fn guarded(f: impl FnOnce() -> c_int) -> c_int {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(code) => code,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".to_string());
            fail(PDLTAB_ERR_INTERNAL, &format!("internal error: {msg}"))
        }
    }
}

unsafe fn read_str<'a>(ptr: *const c_char, what: &str) -> Result<&'a str, c_int> {
    if ptr.is_null() {
        return Err(fail(PDLTAB_ERR_NULL, &format!("{what} is null")));
    }
    CStr::from_ptr(ptr)
        .to_str()
        .map_err(|_| fail(PDLTAB_ERR_UTF8, &format!("{what} is not valid UTF-8")))
}

/// Create an empty problem. Free with `pdltab_problem_free`.
#[no_mangle]
pub extern "C" fn pdltab_problem_new() -> *mut PdltabProblem {
    Box::into_raw(Box::new(PdltabProblem {
        goals: Vec::new(),
        assumptions: Vec::new(),
        assertions: Vec::new(),
        max_nodes: SolveConfig::default().max_nodes,
    }))
}

/// # Safety
/// `p` must be null or a pointer returned by `pdltab_problem_new` that has
/// not been freed.
#[no_mangle]
pub unsafe extern "C" fn pdltab_problem_free(p: *mut PdltabProblem) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// # Safety
/// `p` must be a live problem handle; `text` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn pdltab_problem_add_goal(
    p: *mut PdltabProblem,
    text: *const c_char,
) -> c_int {
    guarded(|| {
        let Some(problem) = p.as_mut() else {
            return fail(PDLTAB_ERR_NULL, "problem handle is null");
        };
        let text = match read_str(text, "goal formula") {
            Ok(t) => t,
            Err(code) => return code,
        };
        match parse_formula(text) {
            Ok(f) => {
                problem.goals.push(f);
                PDLTAB_OK
            }
            Err(e) => fail(PDLTAB_ERR_PARSE, &e.to_string()),
        }
    })
}

/// # Safety
/// `p` must be a live problem handle; `text` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn pdltab_problem_add_assumption(
    p: *mut PdltabProblem,
    text: *const c_char,
) -> c_int {
    guarded(|| {
        let Some(problem) = p.as_mut() else {
            return fail(PDLTAB_ERR_NULL, "problem handle is null");
        };
        let text = match read_str(text, "assumption formula") {
            Ok(t) => t,
            Err(code) => return code,
        };
        match parse_formula(text) {
            Ok(f) => {
                problem.assumptions.push(f);
                PDLTAB_OK
            }
            Err(e) => fail(PDLTAB_ERR_PARSE, &e.to_string()),
        }
    })
}

/// Add one ABox assertion, `a : <formula>` or `<prog>(<a>,<b>)`.
///
/// # Safety
/// `p` must be a live problem handle; `text` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn pdltab_problem_add_assertion(
    p: *mut PdltabProblem,
    text: *const c_char,
) -> c_int {
    guarded(|| {
        let Some(problem) = p.as_mut() else {
            return fail(PDLTAB_ERR_NULL, "problem handle is null");
        };
        let text = match read_str(text, "assertion") {
            Ok(t) => t,
            Err(code) => return code,
        };
        match parse_assertion(text) {
            Ok(a) => {
                problem.assertions.push(a);
                PDLTAB_OK
            }
            Err(e) => fail(PDLTAB_ERR_PARSE, &e.to_string()),
        }
    })
}

/// # Safety
/// `p` must be a live problem handle.
#[no_mangle]
pub unsafe extern "C" fn pdltab_problem_set_max_nodes(p: *mut PdltabProblem, max_nodes: u64) {
    if let Some(problem) = p.as_mut() {
        problem.max_nodes = max_nodes as usize;
    }
}

fn normalized(problem: &PdltabProblem) -> (Vec<Formula>, Vec<Formula>, Vec<Assertion>) {
    let goals = problem.goals.iter().map(to_nnf).collect();
    let assumptions = problem.assumptions.iter().map(to_nnf).collect();
    let assertions = problem
        .assertions
        .iter()
        .map(|a| match a {
            Assertion::Concept(v, f) => Assertion::Concept(v.clone(), to_nnf(f)),
            role => role.clone(),
        })
        .collect();
    (goals, assumptions, assertions)
}

fn deliver(
    out: *mut *mut PdltabResult,
    verdict: pdltab::decision::Verdict,
    model: Option<CString>,
) -> c_int {
    let result = PdltabResult {
        verdict: verdict.satisfiable,
        nodes: verdict.stats.nodes as u64,
        iterations: verdict.stats.iterations as u64,
        millis: verdict.stats.millis,
        model,
    };
    unsafe {
        *out = Box::into_raw(Box::new(result));
    }
    PDLTAB_OK
}

fn solve_failure(e: SolveError) -> c_int {
    fail(PDLTAB_ERR_LIMIT, &e.to_string())
}

/// Check satisfiability of the goal formulas w.r.t. the assumptions. The
/// problem must hold no assertions. On a positive verdict the result carries
/// a serialized model.
///
/// # Safety
/// `p` must be a live problem handle and `out` a valid location.
#[no_mangle]
pub unsafe extern "C" fn pdltab_check_sat(
    p: *const PdltabProblem,
    out: *mut *mut PdltabResult,
) -> c_int {
    guarded(|| {
        let Some(problem) = p.as_ref() else {
            return fail(PDLTAB_ERR_NULL, "problem handle is null");
        };
        if out.is_null() {
            return fail(PDLTAB_ERR_NULL, "result location is null");
        }
        if !problem.assertions.is_empty() {
            return fail(
                PDLTAB_ERR_KIND,
                "problem holds ABox assertions; use pdltab_check_abox_sat",
            );
        }
        let (goals, assumptions, _) = normalized(problem);
        let cfg = SolveConfig {
            max_nodes: problem.max_nodes,
        };
        match check_sat(&goals, &assumptions, &cfg) {
            Ok((verdict, graph)) => {
                let model = verdict.witness.as_ref().and_then(|m| {
                    extract_model(
                        &graph,
                        m,
                        &ProblemInput::Formulas(goals.clone()),
                        &assumptions,
                    )
                    .ok()
                    .and_then(|(_, model)| CString::new(model.to_string()).ok())
                });
                deliver(out, verdict, model)
            }
            Err(e) => solve_failure(e),
        }
    })
}

/// Check consistency of the assertions w.r.t. the assumptions, with
/// `PDLTAB_ALG_CACHED` or `PDLTAB_ALG_BACKTRACK`. The problem must hold no
/// goal formulas.
///
/// # Safety
/// `p` must be a live problem handle and `out` a valid location.
#[no_mangle]
pub unsafe extern "C" fn pdltab_check_abox_sat(
    p: *const PdltabProblem,
    algorithm: c_int,
    out: *mut *mut PdltabResult,
) -> c_int {
    guarded(|| {
        let Some(problem) = p.as_ref() else {
            return fail(PDLTAB_ERR_NULL, "problem handle is null");
        };
        if out.is_null() {
            return fail(PDLTAB_ERR_NULL, "result location is null");
        }
        if !problem.goals.is_empty() {
            return fail(
                PDLTAB_ERR_KIND,
                "problem holds goal formulas; use pdltab_check_sat",
            );
        }
        if problem.assertions.is_empty() {
            return fail(PDLTAB_ERR_KIND, "problem holds no ABox assertions");
        }
        let (_, assumptions, assertions) = normalized(problem);
        let cfg = SolveConfig {
            max_nodes: problem.max_nodes,
        };
        let solved = match algorithm {
            PDLTAB_ALG_CACHED => check_abox_sat(&assertions, &assumptions, &cfg),
            PDLTAB_ALG_BACKTRACK => check_abox_sat_backtracking(&assertions, &assumptions, &cfg),
            _ => return fail(PDLTAB_ERR_ARG, "unknown algorithm"),
        };
        match solved {
            Ok((verdict, graph)) => {
                let model = verdict.witness.as_ref().and_then(|m| {
                    extract_model(
                        &graph,
                        m,
                        &ProblemInput::Abox(assertions.clone()),
                        &assumptions,
                    )
                    .ok()
                    .and_then(|(_, model)| CString::new(model.to_string()).ok())
                });
                deliver(out, verdict, model)
            }
            Err(e) => solve_failure(e),
        }
    })
}

/// Check whether `formula` holds of `var` in every model of the problem's
/// assertions and assumptions, with `PDLTAB_ENC_DIRECT` or
/// `PDLTAB_ENC_FRESH_PROP`. The result verdict is 1 when entailed.
///
/// # Safety
/// `p` must be a live problem handle, the strings NUL-terminated, `out` a
/// valid location.
#[no_mangle]
pub unsafe extern "C" fn pdltab_instance_check(
    p: *const PdltabProblem,
    var: *const c_char,
    formula: *const c_char,
    encoding: c_int,
    out: *mut *mut PdltabResult,
) -> c_int {
    guarded(|| {
        let Some(problem) = p.as_ref() else {
            return fail(PDLTAB_ERR_NULL, "problem handle is null");
        };
        if out.is_null() {
            return fail(PDLTAB_ERR_NULL, "result location is null");
        }
        if problem.assertions.is_empty() {
            return fail(PDLTAB_ERR_KIND, "problem holds no ABox assertions");
        }
        let var = match read_str(var, "state variable") {
            Ok(v) => v,
            Err(code) => return code,
        };
        let formula = match read_str(formula, "formula") {
            Ok(f) => f,
            Err(code) => return code,
        };
        let phi = match parse_formula(formula) {
            Ok(f) => f,
            Err(e) => return fail(PDLTAB_ERR_PARSE, &e.to_string()),
        };
        let encoding = match encoding {
            PDLTAB_ENC_DIRECT => Encoding::Direct,
            PDLTAB_ENC_FRESH_PROP => Encoding::FreshProp,
            _ => return fail(PDLTAB_ERR_ARG, "unknown encoding"),
        };
        let (_, assumptions, assertions) = normalized(problem);
        let cfg = SolveConfig {
            max_nodes: problem.max_nodes,
        };
        match instance_check(
            &assertions,
            &assumptions,
            &phi,
            &Ident::new(var),
            encoding,
            &cfg,
        ) {
            Ok((entailed, stats)) => {
                let result = PdltabResult {
                    verdict: entailed,
                    nodes: stats.nodes as u64,
                    iterations: stats.iterations as u64,
                    millis: stats.millis,
                    model: None,
                };
                *out = Box::into_raw(Box::new(result));
                PDLTAB_OK
            }
            Err(e) => solve_failure(e),
        }
    })
}

/// # Safety
/// `r` must be null or a live result handle.
#[no_mangle]
pub unsafe extern "C" fn pdltab_result_free(r: *mut PdltabResult) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}

/// 1 for satisfiable/entailed, 0 otherwise (and for a null handle).
///
/// # Safety
/// `r` must be null or a live result handle.
#[no_mangle]
pub unsafe extern "C" fn pdltab_result_verdict(r: *const PdltabResult) -> c_int {
    r.as_ref().map_or(0, |res| c_int::from(res.verdict))
}

/// # Safety
/// `r` must be null or a live result handle.
#[no_mangle]
pub unsafe extern "C" fn pdltab_result_nodes(r: *const PdltabResult) -> u64 {
    r.as_ref().map_or(0, |res| res.nodes)
}

/// # Safety
/// `r` must be null or a live result handle.
#[no_mangle]
pub unsafe extern "C" fn pdltab_result_iterations(r: *const PdltabResult) -> u64 {
    r.as_ref().map_or(0, |res| res.iterations)
}

/// # Safety
/// `r` must be null or a live result handle.
#[no_mangle]
pub unsafe extern "C" fn pdltab_result_millis(r: *const PdltabResult) -> u64 {
    r.as_ref().map_or(0, |res| res.millis)
}

/// The serialized Kripke model of a positive satisfiability verdict, or
/// null. The string lives as long as the result handle.
///
/// # Safety
/// `r` must be null or a live result handle.
#[no_mangle]
pub unsafe extern "C" fn pdltab_result_model(r: *const PdltabResult) -> *const c_char {
    r.as_ref()
        .and_then(|res| res.model.as_ref())
        .map_or(ptr::null(), |s| s.as_ptr())
}

/// The message of the most recent failure on this thread; empty when none.
/// Valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn pdltab_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

#[no_mangle]
pub extern "C" fn pdltab_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
