//! C ABI over `mobsamp`.
//!
//! Conventions:
//! - every function returns an [`MsStatus`] and writes results through out
//!   pointers;
//! - objects are opaque handles released with their `_free` function;
//! - strings returned to the caller are released with [`ms_string_free`];
//! - after a failure, [`ms_last_error_message`] describes it (per thread);
//! - panics never cross the boundary and are reported as `MS_STATUS_PANIC`.

use mobsamp::density::{self, DiscreteSet};
use mobsamp::scenario::{self, RunError};
use mobsamp::uniqueness;
use mobsamp::{ConvexBody, Vec2};
use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

/// Result code of every entry point.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    /// Input JSON does not match the schema.
    SchemaError = 3,
    /// A library routine rejected valid-looking input.
    ModuleError = 4,
    IoError = 5,
    Panic = 6,
}

/// Opaque compact convex body.
pub struct MsBody {
    inner: ConvexBody,
}

/// Opaque discrete set.
pub struct MsSet {
    inner: DiscreteSet,
}

struct Failure(MsStatus, String);

impl From<RunError> for Failure {
    fn from(e: RunError) -> Self {
        let status = match &e {
            RunError::Schema(_) => MsStatus::SchemaError,
            RunError::Module(_) => MsStatus::ModuleError,
            RunError::Io(_) => MsStatus::IoError,
        };
        Failure(status, e.to_string())
    }
}

fn module(e: impl std::fmt::Display) -> Failure {
    Failure(MsStatus::ModuleError, e.to_string())
}

fn schema(e: impl std::fmt::Display) -> Failure {
    Failure(MsStatus::SchemaError, e.to_string())
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> MsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_last_error("");
            MsStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_last_error(&msg);
            status
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_last_error(&format!("internal panic: {msg}"));
            MsStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure(MsStatus::NullPointer, format!("`{name}` is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(MsStatus::InvalidUtf8, format!("`{name}` is not UTF-8")))
}

fn check_out<T>(p: *mut T, name: &str) -> Result<(), Failure> {
    if p.is_null() {
        Err(Failure(MsStatus::NullPointer, format!("`{name}` is null")))
    } else {
        Ok(())
    }
}

unsafe fn ref_arg<'a, T>(p: *const T, name: &str) -> Result<&'a T, Failure> {
    p.as_ref()
        .ok_or_else(|| Failure(MsStatus::NullPointer, format!("`{name}` is null")))
}

fn into_c_string(s: String) -> Result<*mut c_char, Failure> {
    CString::new(s).map(CString::into_raw).map_err(module)
}

/// Parses a body from JSON (`{"kind":"disk",...}` or `{"kind":"polygon",...}`).
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ms_body_from_json(json: *const c_char, out: *mut *mut MsBody) -> MsStatus {
    guard(|| {
        check_out(out, "out")?;
        let text = str_arg(json, "json")?;
        let inner: ConvexBody = serde_json::from_str(text).map_err(schema)?;
        *out = Box::into_raw(Box::new(MsBody { inner }));
        Ok(())
    })
}

/// Convex hull of `n` points stored as `x0, y0, x1, y1, …`.
///
/// # Safety
/// `xy` must point to `2n` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ms_body_polygon(xy: *const f64, n: usize, out: *mut *mut MsBody) -> MsStatus {
    guard(|| {
        check_out(out, "out")?;
        if xy.is_null() {
            return Err(Failure(MsStatus::NullPointer, "`xy` is null".into()));
        }
        let raw = std::slice::from_raw_parts(xy, 2 * n);
        let pts: Vec<Vec2> = raw.chunks_exact(2).map(|c| Vec2::new(c[0], c[1])).collect();
        let inner = ConvexBody::hull(&pts).map_err(module)?;
        *out = Box::into_raw(Box::new(MsBody { inner }));
        Ok(())
    })
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ms_body_disk(cx: f64, cy: f64, radius: f64, out: *mut *mut MsBody) -> MsStatus {
    guard(|| {
        check_out(out, "out")?;
        let inner = ConvexBody::disk(Vec2::new(cx, cy), radius).map_err(module)?;
        *out = Box::into_raw(Box::new(MsBody { inner }));
        Ok(())
    })
}

/// Releases a body; null is ignored.
///
/// # Safety
/// `body` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ms_body_free(body: *mut MsBody) {
    if !body.is_null() {
        let _ = catch_unwind(AssertUnwindSafe(|| drop(Box::from_raw(body))));
    }
}

/// Support function `H(y) = max_{x∈Ω} ⟨x, y⟩`.
///
/// # Safety
/// `body` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ms_support(body: *const MsBody, y1: f64, y2: f64, out: *mut f64) -> MsStatus {
    guard(|| {
        let b = ref_arg(body, "body")?;
        check_out(out, "out")?;
        *out = b.inner.support(Vec2::new(y1, y2));
        Ok(())
    })
}

/// Parses a discrete set from JSON.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ms_set_from_json(json: *const c_char, out: *mut *mut MsSet) -> MsStatus {
    guard(|| {
        check_out(out, "out")?;
        let text = str_arg(json, "json")?;
        let inner: DiscreteSet = serde_json::from_str(text).map_err(schema)?;
        *out = Box::into_raw(Box::new(MsSet { inner }));
        Ok(())
    })
}

/// Releases a set; null is ignored.
///
/// # Safety
/// `set` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ms_set_free(set: *mut MsSet) {
    if !set.is_null() {
        let _ = catch_unwind(AssertUnwindSafe(|| drop(Box::from_raw(set))));
    }
}

/// `θ(t)`: number of points in the open disk (interval) of radius `t`.
///
/// # Safety
/// `set` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ms_counting(set: *const MsSet, t: f64, out: *mut u64) -> MsStatus {
    guard(|| {
        let s = ref_arg(set, "set")?;
        check_out(out, "out")?;
        *out = density::counting(&s.inner, t).map_err(module)?;
        Ok(())
    })
}

/// Monte-Carlo estimate of `α` with its standard error.
///
/// # Safety
/// `value` and `std_error` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ms_estimate_alpha(
    samples: usize,
    seed: u64,
    value: *mut f64,
    std_error: *mut f64,
) -> MsStatus {
    guard(|| {
        check_out(value, "value")?;
        check_out(std_error, "std_error")?;
        let a = uniqueness::estimate_alpha(samples, seed).map_err(module)?;
        *value = a.value;
        *std_error = a.std_error;
        Ok(())
    })
}

/// Stable-sampling verdict as JSON; release it with [`ms_string_free`].
///
/// # Safety
/// Inputs must be NUL-terminated strings; `out_json` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ms_decide_json(
    spectrum_json: *const c_char,
    trajectory_json: *const c_char,
    out_json: *mut *mut c_char,
) -> MsStatus {
    guard(|| {
        check_out(out_json, "out_json")?;
        let spectrum: serde_json::Value =
            serde_json::from_str(str_arg(spectrum_json, "spectrum_json")?).map_err(|e| schema(format!("spectrum: {e}")))?;
        let trajectory: serde_json::Value = serde_json::from_str(str_arg(trajectory_json, "trajectory_json")?)
            .map_err(|e| schema(format!("trajectory: {e}")))?;
        let doc = serde_json::json!({"task": "decide", "spectrum": spectrum, "trajectory": trajectory});
        let s = scenario::parse_scenario_value(doc).map_err(|e| Failure::from(RunError::Schema(e)))?;
        let report = scenario::run(&s, Path::new("."))?;
        *out_json = into_c_string(scenario::to_json(&report))?;
        Ok(())
    })
}

/// Runs a scenario document; `out_dir` (may be null for `.`) receives CSV
/// files of `emit` tasks.
///
/// # Safety
/// `scenario_json` and a non-null `out_dir` must be NUL-terminated strings;
/// `out_json` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ms_run_scenario(
    scenario_json: *const c_char,
    out_dir: *const c_char,
    out_json: *mut *mut c_char,
) -> MsStatus {
    guard(|| {
        check_out(out_json, "out_json")?;
        let text = str_arg(scenario_json, "scenario_json")?;
        let dir = if out_dir.is_null() { "." } else { str_arg(out_dir, "out_dir")? };
        let s = scenario::parse_scenario(text).map_err(|e| Failure::from(RunError::Schema(e)))?;
        let report = scenario::run(&s, Path::new(dir))?;
        *out_json = into_c_string(scenario::to_json(&report))?;
        Ok(())
    })
}

/// Releases a string returned by this library; null is ignored.
///
/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ms_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Message of the last failure on this thread, empty after a success.
/// Valid until the next call into the library on the same thread.
#[no_mangle]
pub extern "C" fn ms_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ms_version() -> *const c_char {
    static VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), "\0");
    VERSION.as_ptr().cast()
}
