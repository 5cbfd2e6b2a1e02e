//! C ABI for relip: opaque problem and option handles, JSON reports, status codes.
//!
//! Every function returning `RelipStatus` stores a message retrievable with
//! `relip_last_error` when it fails. Strings returned by the library must be released
//! with `relip_string_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use relip_core::geometry::rational::parse_rat;
use relip_core::geometry::set_dimension_cap;
use relip_core::io::commands::{run_command, Command, RunOptions};
use relip_core::io::problem::{parse_problem, Problem};
use relip_core::Error;

/// Outcome of a library call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RelipStatus {
    Ok = 0,
    /// Verdicts were computed but the hypotheses of the checked result do not hold.
    HypothesesUnmet = 1,
    NullPointer = 2,
    InvalidUtf8 = 3,
    Parse = 4,
    InvalidParameter = 5,
    DimensionMismatch = 6,
    PointNotInSet = 7,
    DimensionCap = 8,
    Undecided = 9,
    SearchFailed = 10,
    Unsupported = 11,
    UnknownName = 12,
    Io = 13,
    Panic = 14,
}

impl From<&Error> for RelipStatus {
    fn from(e: &Error) -> RelipStatus {
        match e {
            Error::DimensionMismatch { .. } => RelipStatus::DimensionMismatch,
            Error::PointNotInSet => RelipStatus::PointNotInSet,
            Error::DimensionCap { .. } => RelipStatus::DimensionCap,
            Error::InvalidParameter(_) => RelipStatus::InvalidParameter,
            Error::Undecided(_) => RelipStatus::Undecided,
            Error::HypothesesUnmet(_) => RelipStatus::HypothesesUnmet,
            Error::SearchFailed(_) => RelipStatus::SearchFailed,
            Error::Unsupported(_) => RelipStatus::Unsupported,
            Error::Parse { .. } => RelipStatus::Parse,
            Error::UnknownName { .. } => RelipStatus::UnknownName,
            Error::Io(_) => RelipStatus::Io,
        }
    }
}

/// A parsed and validated problem file.
pub struct RelipProblem(Problem);

/// Parameter overrides for `relip_run`.
pub struct RelipOptions(RunOptions);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let c = CString::new(msg.into().replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(status: RelipStatus, msg: impl Into<String>) -> RelipStatus {
    set_error(msg);
    status
}

fn guarded(f: impl FnOnce() -> RelipStatus) -> RelipStatus {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| fail(RelipStatus::Panic, "internal panic"))
}

unsafe fn read_str<'a>(p: *const c_char) -> Result<&'a str, RelipStatus> {
    if p.is_null() {
        return Err(fail(RelipStatus::NullPointer, "null string argument"));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(RelipStatus::InvalidUtf8, "string argument is not UTF-8"))
}

/// Message of the last failed call on this thread, or null. Owned by the library and
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn relip_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn relip_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Sets the process-wide dimension cap for generator enumeration.
#[no_mangle]
pub extern "C" fn relip_set_dimension_cap(cap: usize) {
    set_dimension_cap(cap);
}

/// Parses a JSON problem document.
///
/// # Safety
/// `text` must be a valid nul-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn relip_problem_parse(text: *const c_char, out: *mut *mut RelipProblem) -> RelipStatus {
    guarded(|| {
        if out.is_null() {
            return fail(RelipStatus::NullPointer, "null output pointer");
        }
        *out = ptr::null_mut();
        let text = match read_str(text) {
            Ok(t) => t,
            Err(s) => return s,
        };
        match parse_problem(text) {
            Ok(p) => {
                *out = Box::into_raw(Box::new(RelipProblem(p)));
                RelipStatus::Ok
            }
            Err(e) => fail((&e).into(), e.to_string()),
        }
    })
}

/// Releases a problem; null is ignored.
///
/// # Safety
/// `problem` must come from `relip_problem_parse` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn relip_problem_free(problem: *mut RelipProblem) {
    if !problem.is_null() {
        drop(Box::from_raw(problem));
    }
}

/// Fresh options with every parameter taken from the problem file.
#[no_mangle]
pub extern "C" fn relip_options_new() -> *mut RelipOptions {
    Box::into_raw(Box::new(RelipOptions(RunOptions::default())))
}

/// Sets one parameter: `eps`, `delta`, `grid`, `radius` or `nu` (rationals such as
/// `"1/4"`), or `budget` (a nonnegative integer).
///
/// # Safety
/// `options` must come from `relip_options_new`; `key` and `value` must be valid strings.
#[no_mangle]
pub unsafe extern "C" fn relip_options_set(
    options: *mut RelipOptions,
    key: *const c_char,
    value: *const c_char,
) -> RelipStatus {
    guarded(|| {
        let Some(opts) = options.as_mut() else {
            return fail(RelipStatus::NullPointer, "null options handle");
        };
        let (key, value) = match (read_str(key), read_str(value)) {
            (Ok(k), Ok(v)) => (k, v),
            (Err(s), _) | (_, Err(s)) => return s,
        };
        let o = &mut opts.0;
        if key == "budget" {
            return match value.trim().parse() {
                Ok(b) => {
                    o.budget = Some(b);
                    RelipStatus::Ok
                }
                Err(_) => fail(RelipStatus::InvalidParameter, format!("budget `{value}` is not an integer")),
            };
        }
        let slot = match key {
            "eps" => &mut o.eps,
            "delta" => &mut o.delta,
            "grid" => &mut o.grid,
            "radius" => &mut o.radius,
            "nu" => &mut o.nu,
            other => return fail(RelipStatus::InvalidParameter, format!("unknown option `{other}`")),
        };
        match parse_rat(value) {
            Ok(q) => {
                *slot = Some(q);
                RelipStatus::Ok
            }
            Err(e) => fail((&e).into(), e.to_string()),
        }
    })
}

/// Releases options; null is ignored.
///
/// # Safety
/// `options` must come from `relip_options_new` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn relip_options_free(options: *mut RelipOptions) {
    if !options.is_null() {
        drop(Box::from_raw(options));
    }
}

/// Runs a command (`cone`, `coderivative`, `lipschitz`, `regularity`, `verify-chain`,
/// `verify-sum`, `extremal`, `fuzzy`) and writes the JSON report to `out_json`.
///
/// Returns `RELIP_STATUS_HYPOTHESES_UNMET` with a report when the verdicts were computed
/// under unmet hypotheses. `options` may be null.
///
/// # Safety
/// Handles must come from this library; `command` must be a valid string and `out_json`
/// a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn relip_run(
    problem: *const RelipProblem,
    command: *const c_char,
    options: *const RelipOptions,
    out_json: *mut *mut c_char,
) -> RelipStatus {
    guarded(|| {
        if out_json.is_null() {
            return fail(RelipStatus::NullPointer, "null output pointer");
        }
        *out_json = ptr::null_mut();
        let Some(problem) = problem.as_ref() else {
            return fail(RelipStatus::NullPointer, "null problem handle");
        };
        let name = match read_str(command) {
            Ok(c) => c,
            Err(s) => return s,
        };
        let Some(cmd) = Command::from_name(name) else {
            return fail(RelipStatus::InvalidParameter, format!("unknown command `{name}`"));
        };
        let defaults = RunOptions::default();
        let opts = options.as_ref().map_or(&defaults, |o| &o.0);
        match run_command(cmd, &problem.0, opts) {
            Ok(report) => {
                let met = report.hypotheses_met;
                let json = CString::new(report.to_json()).expect("JSON has no nul bytes");
                *out_json = json.into_raw();
                if met {
                    RelipStatus::Ok
                } else {
                    fail(RelipStatus::HypothesesUnmet, "hypotheses unmet")
                }
            }
            Err(e) => fail((&e).into(), e.to_string()),
        }
    })
}

/// Releases a string returned by the library; null is ignored.
///
/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn relip_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
