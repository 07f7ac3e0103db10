//! C interface to `stable_mallows`.
//!
//! Every function returns an [`SmStatus`]. Outputs go through pointer
//! arguments and are written only on success. Strings returned to the caller
//! are NUL-terminated and must be released with [`sm_string_free`]; handles
//! with [`sm_prefs_free`]. After a failure, [`sm_last_error`] describes it on
//! the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use stable_mallows::analysis::{estimate_gamma, rho_lower_bound};
use stable_mallows::cutpoints::{decompose, DecompositionMethod};
use stable_mallows::matching::count_stable;
use stable_mallows::prefs::parse_prefs_json;
use stable_mallows::{Error, IntInterval, MallowsParams, PreferenceStructure};

/// Result of every call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SmStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    BudgetExceeded = 3,
    Malformed = 4,
    Panic = 5,
    Internal = 6,
}

/// Decomposition method codes for [`sm_decompose_json`] and [`sm_estimate_gamma_csv`].
pub const SM_METHOD_CERTIFIED: i32 = 0;
pub const SM_METHOD_EXACT: i32 = 1;
pub const SM_METHOD_AUTO: i32 = 2;

/// Opaque preference structure.
pub struct SmPrefs {
    inner: PreferenceStructure,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).expect("NUL bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> SmStatus {
    match e {
        Error::BudgetExceeded { .. } | Error::LimitExceeded { .. } | Error::AllTrialsFailed { .. } => {
            SmStatus::BudgetExceeded
        }
        Error::Malformed { .. } => SmStatus::Malformed,
        Error::Io(_) | Error::Overflow => SmStatus::Internal,
        _ => SmStatus::InvalidArgument,
    }
}

/// Runs `f`, recording any error or panic for [`sm_last_error`].
fn guard(f: impl FnOnce() -> Result<(), (SmStatus, String)>) -> SmStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            SmStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("panic inside stable_mallows");
            SmStatus::Panic
        }
    }
}

fn lib<T>(r: stable_mallows::Result<T>) -> Result<T, (SmStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(what: &str) -> (SmStatus, String) {
    (SmStatus::NullPointer, format!("{what} is null"))
}

fn method(code: i32) -> Result<DecompositionMethod, (SmStatus, String)> {
    match code {
        SM_METHOD_CERTIFIED => Ok(DecompositionMethod::Certified),
        SM_METHOD_EXACT => Ok(DecompositionMethod::Exact),
        SM_METHOD_AUTO => Ok(DecompositionMethod::Auto),
        _ => Err((SmStatus::InvalidArgument, format!("unknown method code {code}"))),
    }
}

/// # Safety
/// `out` must be null or valid for writes.
unsafe fn put_string(out: *mut *mut c_char, s: String) -> Result<(), (SmStatus, String)> {
    let c = CString::new(s).map_err(|_| (SmStatus::Internal, "string contains NUL".to_string()))?;
    *out = c.into_raw();
    Ok(())
}

/// # Safety
/// `out` must be null or valid for writes.
unsafe fn put_prefs(out: *mut *mut SmPrefs, p: PreferenceStructure) {
    *out = Box::into_raw(Box::new(SmPrefs { inner: p }));
}

/// Message for the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn sm_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Sample a preference structure on `[1, n]`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn sm_prefs_sample(q: f64, n: usize, seed: u64, out: *mut *mut SmPrefs) -> SmStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let params = lib(MallowsParams::new(q))?;
        let p = lib(IntInterval::one_to(n).and_then(|d| PreferenceStructure::sample(&params, d, seed)))?;
        put_prefs(out, p);
        Ok(())
    })
}

/// The two-matching gadget on `[-m, m]`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn sm_prefs_gadget(m: i64, out: *mut *mut SmPrefs) -> SmStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        put_prefs(out, lib(PreferenceStructure::gadget(m))?);
        Ok(())
    })
}

/// Parse a preference document.
///
/// # Safety
/// `json` must be a NUL-terminated UTF-8 string and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn sm_prefs_from_json(json: *const c_char, out: *mut *mut SmPrefs) -> SmStatus {
    guard(|| {
        if json.is_null() {
            return Err(null("json"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let text = CStr::from_ptr(json)
            .to_str()
            .map_err(|_| (SmStatus::Malformed, "input is not UTF-8".to_string()))?;
        put_prefs(out, lib(parse_prefs_json("<input>", text))?.0);
        Ok(())
    })
}

/// Release a handle. Null is ignored.
///
/// # Safety
/// `p` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sm_prefs_free(p: *mut SmPrefs) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Domain bounds of a structure.
///
/// # Safety
/// `p` must be a live handle; `lo` and `hi` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn sm_prefs_domain(p: *const SmPrefs, lo: *mut i64, hi: *mut i64) -> SmStatus {
    guard(|| {
        let p = p.as_ref().ok_or_else(|| null("prefs"))?;
        if lo.is_null() || hi.is_null() {
            return Err(null("lo or hi"));
        }
        *lo = p.inner.domain().lo();
        *hi = p.inner.domain().hi();
        Ok(())
    })
}

/// Preference document as JSON.
///
/// # Safety
/// `p` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn sm_prefs_to_json(p: *const SmPrefs, out: *mut *mut c_char) -> SmStatus {
    guard(|| {
        let p = p.as_ref().ok_or_else(|| null("prefs"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        put_string(out, p.inner.to_json(None, None))
    })
}

/// Exact number of stable matchings as a decimal string, and its natural log.
/// `log_count` may be null.
///
/// # Safety
/// `p` must be a live handle, `decimal` valid for writes, `log_count` null or valid.
#[no_mangle]
pub unsafe extern "C" fn sm_count_stable(
    p: *const SmPrefs,
    budget: u64,
    decimal: *mut *mut c_char,
    log_count: *mut f64,
) -> SmStatus {
    guard(|| {
        let p = p.as_ref().ok_or_else(|| null("prefs"))?;
        if decimal.is_null() {
            return Err(null("decimal"));
        }
        let c = lib(count_stable(&p.inner, budget))?;
        if !log_count.is_null() {
            *log_count = c.log_value();
        }
        put_string(decimal, c.to_string())
    })
}

/// Block decomposition with per-block counts, as JSON.
///
/// # Safety
/// `p` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn sm_decompose_json(
    p: *const SmPrefs,
    method_code: i32,
    budget: u64,
    out: *mut *mut c_char,
) -> SmStatus {
    guard(|| {
        let p = p.as_ref().ok_or_else(|| null("prefs"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let d = lib(decompose(&p.inner, method(method_code)?, budget))?;
        put_string(out, d.to_json().to_string())
    })
}

/// Log of the certified-cut probability bound at `N`; `finite` is 0 when vacuous.
///
/// # Safety
/// `log_value` and `finite` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn sm_rho_lower_bound(q: f64, n_param: u64, log_value: *mut f64, finite: *mut i32) -> SmStatus {
    guard(|| {
        if log_value.is_null() || finite.is_null() {
            return Err(null("log_value or finite"));
        }
        let b = lib(MallowsParams::new(q).and_then(|p| rho_lower_bound(&p, n_param)))?;
        *log_value = b.log_value;
        *finite = b.finite as i32;
        Ok(())
    })
}

/// Growth-rate estimate; the per-trial CSV goes to `csv`, the estimate and
/// its standard error to `gamma_hat` and `std_err` (either may be null).
///
/// # Safety
/// `csv` must be valid for writes; `gamma_hat` and `std_err` null or valid.
#[no_mangle]
pub unsafe extern "C" fn sm_estimate_gamma_csv(
    q: f64,
    n: usize,
    trials: u64,
    seed: u64,
    method_code: i32,
    budget: u64,
    csv: *mut *mut c_char,
    gamma_hat: *mut f64,
    std_err: *mut f64,
) -> SmStatus {
    guard(|| {
        if csv.is_null() {
            return Err(null("csv"));
        }
        let params = lib(MallowsParams::new(q))?;
        let r = lib(estimate_gamma(&params, n, trials, seed, method(method_code)?, budget))?;
        if !gamma_hat.is_null() {
            *gamma_hat = r.gamma_hat;
        }
        if !std_err.is_null() {
            *std_err = r.std_err;
        }
        put_string(csv, r.to_csv())
    })
}

/// Release a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must be null or a string from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sm_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
