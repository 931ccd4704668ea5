//! C interface to the solver.
//!
//! Instances and solutions are opaque heap handles released with their
//! `*_free` function. Strings returned through `char **` are owned by the
//! caller and released with [`jm_string_free`]. Every fallible call returns a
//! [`JmStatus`]; on failure [`jm_last_error_message`] describes the error for
//! the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use jobmarket::format::{InstanceFile, OutcomeFile};
use jobmarket::market::MarketInstance;
use jobmarket::solver::{self, trace, FloorRule, Solution, SolverConfig};
use jobmarket::verify::{check_stability, Ps2Domain};

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JmStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    ParseError = 3,
    InvalidInstance = 4,
    /// A runtime invariant failed inside the solver.
    SolverFailure = 5,
    /// The outcome does not fit the instance.
    OutcomeMismatch = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JmFloorRule {
    /// Firms keep at least their previous number of workers.
    Occupancy = 0,
    /// Firms that had workers keep at least one.
    Nonempty = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JmPs2Domain {
    Unmatched = 0,
    All = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct JmSolveOptions {
    pub assert_invariants: bool,
    pub floor_rule: JmFloorRule,
}

/// A validated market.
pub struct JmInstance {
    inner: MarketInstance,
}

/// A finished solver run.
pub struct JmSolution {
    inner: Solution,
    stable: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: impl Into<String>) {
    let mut bytes = message.into().into_bytes();
    bytes.retain(|&b| b != 0);
    let text = CString::new(bytes).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = text);
}

fn fail(status: JmStatus, message: impl Into<String>) -> JmStatus {
    set_error(message);
    status
}

/// Runs `body`, turning a panic into [`JmStatus::Panic`].
fn guarded(body: impl FnOnce() -> JmStatus) -> JmStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => {
            if status == JmStatus::Ok {
                set_error("");
            }
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            fail(JmStatus::Panic, msg)
        }
    }
}

unsafe fn read_str<'a>(text: *const c_char) -> Result<&'a str, JmStatus> {
    if text.is_null() {
        return Err(fail(JmStatus::NullArgument, "null string argument"));
    }
    CStr::from_ptr(text)
        .to_str()
        .map_err(|e| fail(JmStatus::InvalidUtf8, e.to_string()))
}

fn give_string(text: String, out: *mut *mut c_char) -> JmStatus {
    match CString::new(text) {
        Ok(s) => {
            unsafe { *out = s.into_raw() };
            JmStatus::Ok
        }
        Err(e) => fail(JmStatus::Panic, e.to_string()),
    }
}

/// Default options: invariants asserted, occupancy floors.
#[no_mangle]
pub extern "C" fn jm_solve_options_default() -> JmSolveOptions {
    JmSolveOptions {
        assert_invariants: true,
        floor_rule: JmFloorRule::Occupancy,
    }
}

/// Parses and validates an instance document.
///
/// # Safety
/// `json` must be a nul-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn jm_instance_from_json(json: *const c_char, out: *mut *mut JmInstance) -> JmStatus {
    guarded(|| {
        if out.is_null() {
            return fail(JmStatus::NullArgument, "null output pointer");
        }
        *out = ptr::null_mut();
        let text = match read_str(json) {
            Ok(t) => t,
            Err(s) => return s,
        };
        let raw = match InstanceFile::from_json(text) {
            Ok(r) => r,
            Err(e) => return fail(JmStatus::ParseError, e.to_string()),
        };
        match raw.validate() {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(JmInstance { inner }));
                JmStatus::Ok
            }
            Err(e) => fail(JmStatus::InvalidInstance, e.to_string()),
        }
    })
}

/// # Safety
/// `instance` must come from [`jm_instance_from_json`] or be null.
#[no_mangle]
pub unsafe extern "C" fn jm_instance_free(instance: *mut JmInstance) {
    if !instance.is_null() {
        drop(Box::from_raw(instance));
    }
}

/// Runs the solver. `options` may be null for the defaults.
///
/// # Safety
/// `instance` must be a live handle, `options` null or valid, `out` valid.
#[no_mangle]
pub unsafe extern "C" fn jm_solve(
    instance: *const JmInstance,
    options: *const JmSolveOptions,
    out: *mut *mut JmSolution,
) -> JmStatus {
    guarded(|| {
        if instance.is_null() || out.is_null() {
            return fail(JmStatus::NullArgument, "null instance or output pointer");
        }
        *out = ptr::null_mut();
        let opts = if options.is_null() {
            jm_solve_options_default()
        } else {
            *options
        };
        let config = SolverConfig {
            assert_invariants: opts.assert_invariants,
            floor_rule: match opts.floor_rule {
                JmFloorRule::Occupancy => FloorRule::Occupancy,
                JmFloorRule::Nonempty => FloorRule::Nonempty,
            },
            ..SolverConfig::default()
        };
        let inst = &(*instance).inner;
        match solver::run(inst, config) {
            Ok(inner) => {
                let stable = check_stability(inst, &inner.outcome, Ps2Domain::Unmatched).is_stable();
                *out = Box::into_raw(Box::new(JmSolution { inner, stable }));
                JmStatus::Ok
            }
            Err(e) => fail(JmStatus::SolverFailure, e.to_string()),
        }
    })
}

/// # Safety
/// `solution` must come from [`jm_solve`] or be null.
#[no_mangle]
pub unsafe extern "C" fn jm_solution_free(solution: *mut JmSolution) {
    if !solution.is_null() {
        drop(Box::from_raw(solution));
    }
}

/// Matching rounds the run took, or 0 for a null handle.
///
/// # Safety
/// `solution` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn jm_solution_iterations(solution: *const JmSolution) -> u64 {
    if solution.is_null() {
        0
    } else {
        (*solution).inner.iterations
    }
}

/// The outcome document of a solution.
///
/// # Safety
/// `instance` must be the handle the solution was computed from.
#[no_mangle]
pub unsafe extern "C" fn jm_outcome_to_json(
    instance: *const JmInstance,
    solution: *const JmSolution,
    out: *mut *mut c_char,
) -> JmStatus {
    guarded(|| {
        if instance.is_null() || solution.is_null() || out.is_null() {
            return fail(JmStatus::NullArgument, "null argument");
        }
        *out = ptr::null_mut();
        let s = &*solution;
        let file = OutcomeFile::from_outcome(&(*instance).inner, &s.inner.outcome, s.inner.iterations, s.stable);
        give_string(file.to_json(), out)
    })
}

/// The trace of a solution, one JSON record per line.
///
/// # Safety
/// `solution` must be a live handle and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn jm_trace_to_jsonl(solution: *const JmSolution, out: *mut *mut c_char) -> JmStatus {
    guarded(|| {
        if solution.is_null() || out.is_null() {
            return fail(JmStatus::NullArgument, "null argument");
        }
        *out = ptr::null_mut();
        let mut buf = Vec::new();
        trace::write_jsonl(&mut buf, &(*solution).inner.trace).expect("writing to memory");
        give_string(String::from_utf8(buf).expect("trace is UTF-8"), out)
    })
}

/// Checks an outcome document against `instance`. On success `*stable`
/// holds the verdict; when unstable and `report` is non-null it receives a
/// JSON description of the violations.
///
/// # Safety
/// `instance` must be live, `outcome_json` nul-terminated, `stable` valid,
/// `report` null or valid.
#[no_mangle]
pub unsafe extern "C" fn jm_check(
    instance: *const JmInstance,
    outcome_json: *const c_char,
    domain: JmPs2Domain,
    stable: *mut bool,
    report: *mut *mut c_char,
) -> JmStatus {
    guarded(|| {
        if instance.is_null() || stable.is_null() {
            return fail(JmStatus::NullArgument, "null argument");
        }
        if !report.is_null() {
            *report = ptr::null_mut();
        }
        let text = match read_str(outcome_json) {
            Ok(t) => t,
            Err(s) => return s,
        };
        let file = match OutcomeFile::from_json(text) {
            Ok(f) => f,
            Err(e) => return fail(JmStatus::ParseError, e.to_string()),
        };
        let inst = &(*instance).inner;
        let outcome = match file.to_outcome(inst) {
            Ok(o) => o,
            Err(e) => return fail(JmStatus::OutcomeMismatch, e.to_string()),
        };
        let domain = match domain {
            JmPs2Domain::Unmatched => Ps2Domain::Unmatched,
            JmPs2Domain::All => Ps2Domain::All,
        };
        let verdict = check_stability(inst, &outcome, domain);
        *stable = verdict.is_stable();
        if !verdict.is_stable() && !report.is_null() {
            return give_string(jobmarket::verify::report_json(&verdict), report);
        }
        JmStatus::Ok
    })
}

/// Message for the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn jm_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// # Safety
/// `text` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn jm_string_free(text: *mut c_char) {
    if !text.is_null() {
        drop(CString::from_raw(text));
    }
}

/// Library version, statically allocated.
#[no_mangle]
pub extern "C" fn jm_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
