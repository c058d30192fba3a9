//! C interface to algokin.
//!
//! Every fallible function returns an `i32` status; `ALGOKIN_OK` is zero.
//! After a failure, [`algokin_last_error`] describes it. Strings handed out
//! by this library are released with [`algokin_free_string`], algorithms
//! with [`algokin_algorithm_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use algokin::dsl::Mode;
use algokin::equivalence::{check_all, check_oracle_equivalent, CompiledAlgorithm, DEFAULT_MAX_REPEAT};
use algokin::symbolic::matz::to_strings;
use algokin::Error;
use serde_json::json;

pub const ALGOKIN_OK: i32 = 0;
pub const ALGOKIN_NULL_ARGUMENT: i32 = 1;
pub const ALGOKIN_INVALID_UTF8: i32 = 2;
pub const ALGOKIN_PARSE_ERROR: i32 = 3;
pub const ALGOKIN_INVALID_ALGORITHM: i32 = 4;
pub const ALGOKIN_UNRELATED: i32 = 5;
pub const ALGOKIN_INTERNAL_ERROR: i32 = 6;

/// A compiled algorithm: its realization and transfer matrix.
pub struct AlgokinAlgorithm {
    inner: CompiledAlgorithm,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn fail(code: i32, msg: impl Into<String>) -> i32 {
    set_error(msg);
    code
}

fn code_for(e: &Error) -> i32 {
    match e {
        Error::Syntax { .. } | Error::UnknownSymbol(_) | Error::Nonlinear(_) | Error::DuplicateOracleCall(_) => ALGOKIN_PARSE_ERROR,
        _ => ALGOKIN_INVALID_ALGORITHM,
    }
}

/// Runs `f`, turning panics into `ALGOKIN_INTERNAL_ERROR`.
fn guard(f: impl FnOnce() -> i32) -> i32 {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(code) => {
            if code == ALGOKIN_OK {
                LAST_ERROR.with(|e| *e.borrow_mut() = None);
            }
            code
        }
        Err(_) => fail(ALGOKIN_INTERNAL_ERROR, "internal error"),
    }
}

fn mode(black_box: bool) -> Mode {
    if black_box {
        Mode::BlackBox
    } else {
        Mode::Functional
    }
}

/// # Safety
/// `out` must be valid for writes.
unsafe fn write_string(out: *mut *mut c_char, s: String) -> i32 {
    match CString::new(s) {
        Ok(c) => {
            *out = c.into_raw();
            ALGOKIN_OK
        }
        Err(_) => fail(ALGOKIN_INTERNAL_ERROR, "output contains a NUL byte"),
    }
}

/// Parses and compiles an algorithm from source text. With `black_box`,
/// every oracle is treated as opaque. On success `*out` owns the result.
///
/// # Safety
/// `source` must be a NUL-terminated string and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn algokin_algorithm_parse(source: *const c_char, black_box: bool, out: *mut *mut AlgokinAlgorithm) -> i32 {
    guard(|| {
        if source.is_null() || out.is_null() {
            return fail(ALGOKIN_NULL_ARGUMENT, "null argument");
        }
        *out = ptr::null_mut();
        let Ok(src) = CStr::from_ptr(source).to_str() else {
            return fail(ALGOKIN_INVALID_UTF8, "source is not valid UTF-8");
        };
        match CompiledAlgorithm::from_source(src, mode(black_box)) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(AlgokinAlgorithm { inner }));
                ALGOKIN_OK
            }
            Err(e) => fail(code_for(&e), e.to_string()),
        }
    })
}

/// Releases an algorithm. Null is ignored.
///
/// # Safety
/// `alg` must be null or a pointer from [`algokin_algorithm_parse`] not yet
/// freed.
#[no_mangle]
pub unsafe extern "C" fn algokin_algorithm_free(alg: *mut AlgokinAlgorithm) {
    if !alg.is_null() {
        drop(Box::from_raw(alg));
    }
}

/// Number of oracle calls per iteration.
///
/// # Safety
/// `alg` must be a live algorithm and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn algokin_algorithm_oracle_count(alg: *const AlgokinAlgorithm, out: *mut usize) -> i32 {
    guard(|| {
        if alg.is_null() || out.is_null() {
            return fail(ALGOKIN_NULL_ARGUMENT, "null argument");
        }
        *out = (*alg).inner.oracles();
        ALGOKIN_OK
    })
}

/// The algorithm's name, as a new string.
///
/// # Safety
/// `alg` must be a live algorithm and `out` valid for writes. The string
/// must be released with [`algokin_free_string`].
#[no_mangle]
pub unsafe extern "C" fn algokin_algorithm_name(alg: *const AlgokinAlgorithm, out: *mut *mut c_char) -> i32 {
    guard(|| {
        if alg.is_null() || out.is_null() {
            return fail(ALGOKIN_NULL_ARGUMENT, "null argument");
        }
        write_string(out, (*alg).inner.name().to_string())
    })
}

/// The transfer matrix as JSON: `{"name": ..., "oracles": [...], "H": [[...]]}` with
/// entries as strings, rows and columns in oracle call order.
///
/// # Safety
/// `alg` must be a live algorithm and `out` valid for writes. The string
/// must be released with [`algokin_free_string`].
#[no_mangle]
pub unsafe extern "C" fn algokin_transfer_json(alg: *const AlgokinAlgorithm, out: *mut *mut c_char) -> i32 {
    guard(|| {
        if alg.is_null() || out.is_null() {
            return fail(ALGOKIN_NULL_ARGUMENT, "null argument");
        }
        let a = &(*alg).inner;
        let v = json!({"name": a.name(), "oracles": a.ss.labels(), "H": to_strings(&a.h)});
        write_string(out, v.to_string())
    })
}

/// Decides how `a` and `b` are related and writes the strongest relation
/// report as JSON to `*out`. Returns `ALGOKIN_UNRELATED` (still writing
/// the report) when no relation holds. `max_repeat` of zero selects the
/// default repetition bound.
///
/// # Safety
/// `a` and `b` must be live algorithms and `out` valid for writes. The
/// string must be released with [`algokin_free_string`].
#[no_mangle]
pub unsafe extern "C" fn algokin_compare(
    a: *const AlgokinAlgorithm,
    b: *const AlgokinAlgorithm,
    max_repeat: usize,
    out: *mut *mut c_char,
) -> i32 {
    guard(|| {
        if a.is_null() || b.is_null() || out.is_null() {
            return fail(ALGOKIN_NULL_ARGUMENT, "null argument");
        }
        let (a, b) = (&(*a).inner, &(*b).inner);
        let max_repeat = if max_repeat == 0 { DEFAULT_MAX_REPEAT } else { max_repeat };
        let report = check_all(a, b, max_repeat)
            .into_iter()
            .next()
            .unwrap_or_else(|| check_oracle_equivalent(a, b));
        let related = report.is_related();
        match write_string(out, report.to_json().to_string()) {
            ALGOKIN_OK if !related => fail(ALGOKIN_UNRELATED, format!("{} and {} are unrelated", a.name(), b.name())),
            code => code,
        }
    })
}

/// The message for the last failure on this thread, as a new string, or
/// null if the last call succeeded.
///
/// # Safety
/// A non-null result must be released with [`algokin_free_string`].
#[no_mangle]
pub unsafe extern "C" fn algokin_last_error() -> *mut c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null_mut(), |m| m.clone().into_raw()))
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must be null or a string from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn algokin_free_string(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
