//! C ABI for dendrite-core.
//!
//! Systems live behind an opaque `DdSystem` handle. Every fallible call
//! returns a `DdStatus`; on failure `dd_last_error` describes what went
//! wrong on the calling thread. Strings handed out by the library must be
//! released with `dd_string_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use dendrite_core::cli::{load_system, run_analyses, Loaded};
use dendrite_core::config::{parse_config, ANALYSES};
use dendrite_core::equicontinuity::{defect_curve, theorem_check, CheckParams, Status};
use dendrite_core::{Error, Rational};

/// Result codes. The numeric values match the CLI exit codes where both exist.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DdStatus {
    Ok = 0,
    InvalidInput = 1,
    Resource = 3,
    NullPointer = 4,
    Panic = 5,
}

/// Outcome of one condition of the equicontinuity check.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DdCondition {
    Holds = 0,
    Fails = 1,
    Undetermined = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DdVerdict {
    pub cond1: DdCondition,
    pub cond2: DdCondition,
    pub cond3: DdCondition,
    /// The three conditions do not contradict each other.
    pub consistent: bool,
    /// The equivalence is not claimed for this system, so disagreement is expected.
    pub fan_mode: bool,
}

/// Opaque handle to a loaded system.
pub struct DdSystem {
    inner: Loaded,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn fail(e: &Error) -> DdStatus {
    set_error(&e.to_string());
    if e.is_resource() {
        DdStatus::Resource
    } else {
        DdStatus::InvalidInput
    }
}

fn guarded(body: impl FnOnce() -> DdStatus) -> DdStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(s) => {
            if s == DdStatus::Ok {
                set_error("");
            }
            s
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(&format!("internal error: {msg}"));
            DdStatus::Panic
        }
    }
}

unsafe fn read_str<'a>(s: *const c_char, what: &str) -> Result<&'a str, DdStatus> {
    if s.is_null() {
        set_error(&format!("{what} is null"));
        return Err(DdStatus::NullPointer);
    }
    CStr::from_ptr(s).to_str().map_err(|_| {
        set_error(&format!("{what} is not valid UTF-8"));
        DdStatus::InvalidInput
    })
}

fn status(s: Status) -> DdCondition {
    match s {
        Status::Holds => DdCondition::Holds,
        Status::Fails => DdCondition::Fails,
        Status::Undetermined => DdCondition::Undetermined,
    }
}

fn params_for(sys: &DdSystem) -> CheckParams {
    let mut p = CheckParams::default();
    sys.inner.analysis.apply(&mut p);
    p
}

fn store(out: *mut *mut DdSystem, loaded: Loaded) {
    unsafe { *out = Box::into_raw(Box::new(DdSystem { inner: loaded })) };
}

/// Parses a system from configuration text.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn dd_system_from_config(text: *const c_char, out: *mut *mut DdSystem) -> DdStatus {
    guarded(|| {
        if out.is_null() {
            set_error("out is null");
            return DdStatus::NullPointer;
        }
        *out = ptr::null_mut();
        let text = match read_str(text, "text") {
            Ok(t) => t,
            Err(s) => return s,
        };
        match parse_config(text) {
            Ok(c) => {
                let name = c.name.clone().unwrap_or_else(|| "config".into());
                store(out, Loaded { name, map: c.map, notes: Vec::new(), fan_mode: false, analysis: c.analysis });
                DdStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// Builds a named example such as `"tent"` or `"shift_star:6"`.
///
/// # Safety
/// `spec` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn dd_system_from_example(spec: *const c_char, out: *mut *mut DdSystem) -> DdStatus {
    guarded(|| {
        if out.is_null() {
            set_error("out is null");
            return DdStatus::NullPointer;
        }
        *out = ptr::null_mut();
        let spec = match read_str(spec, "spec") {
            Ok(t) => t,
            Err(s) => return s,
        };
        match load_system(&format!("example:{spec}"), None, None) {
            Ok(l) => {
                store(out, l);
                DdStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// Releases a system. Null is ignored.
///
/// # Safety
/// `sys` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn dd_system_free(sys: *mut DdSystem) {
    if !sys.is_null() {
        drop(Box::from_raw(sys));
    }
}

/// Number of vertices of the underlying tree, or 0 for a null handle.
///
/// # Safety
/// `sys` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn dd_system_vertex_count(sys: *const DdSystem) -> usize {
    sys.as_ref().map_or(0, |s| s.inner.map.tree().num_vertices())
}

/// Number of edges of the underlying tree, or 0 for a null handle.
///
/// # Safety
/// `sys` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn dd_system_edge_count(sys: *const DdSystem) -> usize {
    sys.as_ref().map_or(0, |s| s.inner.map.tree().num_edges())
}

/// Runs the three-condition check with the system's own parameters.
///
/// # Safety
/// `sys` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn dd_theorem_check(sys: *const DdSystem, out: *mut DdVerdict) -> DdStatus {
    guarded(|| {
        let (Some(sys), false) = (sys.as_ref(), out.is_null()) else {
            set_error("null argument");
            return DdStatus::NullPointer;
        };
        match theorem_check(&sys.inner.map, &params_for(sys)) {
            Ok(v) => {
                let [a, b, c] = v.statuses();
                *out = DdVerdict {
                    cond1: status(a),
                    cond2: status(b),
                    cond3: status(c),
                    consistent: v.consistent,
                    fan_mode: sys.inner.fan_mode,
                };
                DdStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// Equicontinuity defect at `delta = delta_num / delta_den`, written as a
/// reduced fraction. Fails with `Resource` if it does not fit in 64 bits.
///
/// # Safety
/// `sys` must be a live handle and `num`, `den` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn dd_defect(
    sys: *const DdSystem,
    delta_num: i64,
    delta_den: i64,
    num: *mut i64,
    den: *mut i64,
) -> DdStatus {
    guarded(|| {
        let (Some(sys), false, false) = (sys.as_ref(), num.is_null(), den.is_null()) else {
            set_error("null argument");
            return DdStatus::NullPointer;
        };
        if delta_den == 0 || (delta_num > 0) != (delta_den > 0) || delta_num == 0 {
            set_error("delta must be a positive fraction");
            return DdStatus::InvalidInput;
        }
        let delta = Rational::new(delta_num, delta_den);
        let p = params_for(sys);
        let curve = match defect_curve(&sys.inner.map, &[delta], p.horizon, &p.mesh) {
            Ok(c) => c,
            Err(e) => return fail(&e),
        };
        let d = &curve[0].defect;
        match (i64::try_from(&d.numer()), i64::try_from(&d.denom())) {
            (Ok(n), Ok(m)) => {
                *num = n;
                *den = m;
                DdStatus::Ok
            }
            _ => fail(&Error::resource("defect numerator and denominator bits", 64)),
        }
    })
}

/// Runs a comma-separated list of analyses and returns the JSON report
/// without timings. Free the result with `dd_string_free`.
///
/// # Safety
/// `sys` must be a live handle, `analyses` a NUL-terminated string and
/// `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn dd_report_json(sys: *const DdSystem, analyses: *const c_char, out: *mut *mut c_char) -> DdStatus {
    guarded(|| {
        let (Some(sys), false) = (sys.as_ref(), out.is_null()) else {
            set_error("null argument");
            return DdStatus::NullPointer;
        };
        *out = ptr::null_mut();
        let list = match read_str(analyses, "analyses") {
            Ok(t) => t,
            Err(s) => return s,
        };
        let list: Vec<String> = list.split(',').map(|a| a.trim().to_string()).filter(|a| !a.is_empty()).collect();
        if let Some(bad) = list.iter().find(|a| !ANALYSES.contains(&a.as_str())) {
            return fail(&Error::InvalidParam(format!("unknown analysis `{bad}`")));
        }
        match run_analyses("analyze", &sys.inner, &params_for(sys), &list, None, &[]) {
            Ok(rep) => {
                *out = CString::new(rep.to_json(false)).expect("json has no NUL").into_raw();
                DdStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn dd_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Message for the last failed call on this thread, or an empty string.
/// The pointer stays valid until the next call into the library.
#[no_mangle]
pub extern "C" fn dd_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}
