//! C ABI for the epsent toolkit.
//!
//! Conventions: every fallible call returns an [`EpsentStatus`]; results
//! come back through out-pointers. Objects are opaque handles created and
//! released by matching `_free` calls; strings returned through out-pointers
//! are owned by the caller and released with [`epsent_string_free`]. On any
//! non-OK status, [`epsent_last_error_message`] returns a thread-local,
//! NUL-terminated description valid until the next failing call on the
//! same thread. Handles may be shared across threads for concurrent reads;
//! creation and destruction are the caller's responsibility to serialize.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::OnceLock;

use epsent::curve::rate_curve;
use epsent::entropy::solve_entropy;
use epsent::error::Error;
use epsent::geometry::min_enclosing_ball;
use epsent::hypergraph::{build_hypergraph, check_condition1, Hypergraph};
use epsent::model::{load_instance, load_instance_str, ProblemInstance};

/// Status codes returned by every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EpsentStatus {
    Ok = 0,
    /// A required pointer argument was NULL.
    NullArgument = 1,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 2,
    IoError = 3,
    ParseError = 4,
    /// The instance violates a structural invariant.
    InvalidInstance = 5,
    /// The instance exceeds the exact-enumeration guard.
    TooLarge = 6,
    /// A codec or operation precondition failed.
    Precondition = 7,
    /// An internal invariant failed (a bug; please report).
    Internal = 8,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::new("").unwrap());
}

fn set_error(msg: &str) {
    let sanitized: String = msg.chars().filter(|&c| c != '\0').collect();
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).unwrap_or_default();
    });
}

fn status_of(err: &Error) -> EpsentStatus {
    match err {
        Error::Io(_) => EpsentStatus::IoError,
        Error::Parse(_) => EpsentStatus::ParseError,
        Error::InvalidInstance { .. }
        | Error::DimensionMismatch { .. }
        | Error::EmptyPointSet
        | Error::LengthMismatch { .. }
        | Error::IndexOutOfRange { .. }
        | Error::CorruptBlock(_) => EpsentStatus::InvalidInstance,
        Error::InstanceTooLarge { .. } => EpsentStatus::TooLarge,
        _ => EpsentStatus::Precondition,
    }
}

fn fail(err: Error) -> EpsentStatus {
    let status = status_of(&err);
    set_error(&err.to_string());
    status
}

/// Runs a closure behind a panic guard; a panic becomes `Internal` instead
/// of unwinding across the ABI boundary.
fn guarded(f: impl FnOnce() -> EpsentStatus) -> EpsentStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => {
            set_error("internal panic");
            EpsentStatus::Internal
        }
    }
}

/// Opaque problem-instance handle.
pub struct EpsentInstance {
    inner: ProblemInstance,
}

/// Opaque hypergraph handle.
pub struct EpsentHypergraph {
    inner: Hypergraph,
}

unsafe fn cstr<'a>(ptr: *const c_char) -> Result<&'a str, EpsentStatus> {
    if ptr.is_null() {
        set_error("NULL string argument");
        return Err(EpsentStatus::NullArgument);
    }
    CStr::from_ptr(ptr).to_str().map_err(|_| {
        set_error("string argument is not valid UTF-8");
        EpsentStatus::InvalidUtf8
    })
}

fn give_string(out: *mut *mut c_char, text: String) -> EpsentStatus {
    match CString::new(text) {
        Ok(c) => {
            unsafe { *out = c.into_raw() };
            EpsentStatus::Ok
        }
        Err(_) => {
            set_error("output contained an interior NUL");
            EpsentStatus::Internal
        }
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn epsent_version() -> *const c_char {
    static VERSION: OnceLock<CString> = OnceLock::new();
    VERSION
        .get_or_init(|| CString::new(env!("CARGO_PKG_VERSION")).unwrap())
        .as_ptr()
}

/// Description of the most recent failure on this thread.
#[no_mangle]
pub extern "C" fn epsent_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Frees a string returned through an out-pointer.
///
/// # Safety
/// `ptr` must have been produced by this library and not freed before.
#[no_mangle]
pub unsafe extern "C" fn epsent_string_free(ptr: *mut c_char) {
    if !ptr.is_null() {
        drop(CString::from_raw(ptr));
    }
}

/// Loads and validates an instance file.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn epsent_instance_load(
    path: *const c_char,
    out: *mut *mut EpsentInstance,
) -> EpsentStatus {
    guarded(|| {
        if out.is_null() {
            set_error("NULL out pointer");
            return EpsentStatus::NullArgument;
        }
        let path = match cstr(path) {
            Ok(s) => s,
            Err(status) => return status,
        };
        match load_instance(path) {
            Ok(inst) => {
                *out = Box::into_raw(Box::new(EpsentInstance { inner: inst }));
                EpsentStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Parses and validates an instance from a JSON string.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn epsent_instance_from_json(
    json: *const c_char,
    out: *mut *mut EpsentInstance,
) -> EpsentStatus {
    guarded(|| {
        if out.is_null() {
            set_error("NULL out pointer");
            return EpsentStatus::NullArgument;
        }
        let text = match cstr(json) {
            Ok(s) => s,
            Err(status) => return status,
        };
        match load_instance_str(text) {
            Ok(inst) => {
                *out = Box::into_raw(Box::new(EpsentInstance { inner: inst }));
                EpsentStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Copies an instance with a different fidelity cap.
///
/// # Safety
/// `inst` must be a live instance handle; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn epsent_instance_with_epsilon(
    inst: *const EpsentInstance,
    epsilon: f64,
    out: *mut *mut EpsentInstance,
) -> EpsentStatus {
    guarded(|| {
        let Some(inst) = inst.as_ref() else {
            set_error("NULL instance handle");
            return EpsentStatus::NullArgument;
        };
        if out.is_null() {
            set_error("NULL out pointer");
            return EpsentStatus::NullArgument;
        }
        match inst.inner.with_epsilon(epsilon) {
            Ok(copy) => {
                *out = Box::into_raw(Box::new(EpsentInstance { inner: copy }));
                EpsentStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// # Safety
/// `inst` must have come from an instance constructor, at most once.
#[no_mangle]
pub unsafe extern "C" fn epsent_instance_free(inst: *mut EpsentInstance) {
    if !inst.is_null() {
        drop(Box::from_raw(inst));
    }
}

/// Enumerates the maximal hyperedges of the instance's characteristic
/// hypergraph.
///
/// # Safety
/// `inst` must be a live handle; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn epsent_hypergraph_build(
    inst: *const EpsentInstance,
    out: *mut *mut EpsentHypergraph,
) -> EpsentStatus {
    guarded(|| {
        let Some(inst) = inst.as_ref() else {
            set_error("NULL instance handle");
            return EpsentStatus::NullArgument;
        };
        if out.is_null() {
            set_error("NULL out pointer");
            return EpsentStatus::NullArgument;
        }
        match build_hypergraph(&inst.inner) {
            Ok(graph) => {
                *out = Box::into_raw(Box::new(EpsentHypergraph { inner: graph }));
                EpsentStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// # Safety
/// `graph` must have come from `epsent_hypergraph_build`, at most once.
#[no_mangle]
pub unsafe extern "C" fn epsent_hypergraph_free(graph: *mut EpsentHypergraph) {
    if !graph.is_null() {
        drop(Box::from_raw(graph));
    }
}

/// Number of maximal hyperedges; 0 for a NULL handle.
///
/// # Safety
/// `graph` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn epsent_hypergraph_edge_count(graph: *const EpsentHypergraph) -> usize {
    graph.as_ref().map_or(0, |g| g.inner.maximal_edges.len())
}

/// Serializes the hypergraph as JSON; free with `epsent_string_free`.
///
/// # Safety
/// `graph` must be a live handle; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn epsent_hypergraph_to_json(
    graph: *const EpsentHypergraph,
    out: *mut *mut c_char,
) -> EpsentStatus {
    guarded(|| {
        let Some(graph) = graph.as_ref() else {
            set_error("NULL hypergraph handle");
            return EpsentStatus::NullArgument;
        };
        if out.is_null() {
            set_error("NULL out pointer");
            return EpsentStatus::NullArgument;
        }
        give_string(out, graph.inner.to_json())
    })
}

/// True iff the instance satisfies the both-zero-or-both-positive
/// probability condition that guarantees a unique zero-fidelity clustering.
///
/// # Safety
/// `inst` must be a live handle; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn epsent_condition1(
    inst: *const EpsentInstance,
    out: *mut bool,
) -> EpsentStatus {
    guarded(|| {
        let Some(inst) = inst.as_ref() else {
            set_error("NULL instance handle");
            return EpsentStatus::NullArgument;
        };
        if out.is_null() {
            set_error("NULL out pointer");
            return EpsentStatus::NullArgument;
        }
        *out = check_condition1(&inst.inner);
        EpsentStatus::Ok
    })
}

/// Minimizes I(W;X|Y) over hyperedge-supported quantizers. Writes the
/// value in bits to `out_value`; when `out_json` is non-NULL, also writes
/// the full solution (channel rows and reconstruction points) as JSON.
///
/// Pass `tol <= 0` and `max_iter == 0` for the defaults (1e-10, 10000).
///
/// # Safety
/// `inst` must be a live handle; `out_value` must be valid; `out_json`
/// may be NULL.
#[no_mangle]
pub unsafe extern "C" fn epsent_solve_entropy(
    inst: *const EpsentInstance,
    tol: f64,
    max_iter: usize,
    out_value: *mut f64,
    out_json: *mut *mut c_char,
) -> EpsentStatus {
    guarded(|| {
        let Some(inst) = inst.as_ref() else {
            set_error("NULL instance handle");
            return EpsentStatus::NullArgument;
        };
        if out_value.is_null() {
            set_error("NULL out pointer");
            return EpsentStatus::NullArgument;
        }
        let tol = if tol > 0.0 { tol } else { epsent::entropy::DEFAULT_TOL };
        let max_iter = if max_iter > 0 { max_iter } else { epsent::entropy::DEFAULT_MAX_ITER };
        let graph = match build_hypergraph(&inst.inner) {
            Ok(g) => g,
            Err(e) => return fail(e),
        };
        match solve_entropy(&inst.inner, &graph, tol, max_iter) {
            Ok(sol) => {
                *out_value = sol.value;
                if !out_json.is_null() {
                    return give_string(out_json, sol.to_json());
                }
                EpsentStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Traces the piecewise-constant rate curve and returns it as CSV rows
/// (eps_lo, eps_hi, rate); free with `epsent_string_free`.
///
/// # Safety
/// `inst` must be a live handle; `out_csv` must be valid.
#[no_mangle]
pub unsafe extern "C" fn epsent_rate_curve_csv(
    inst: *const EpsentInstance,
    out_csv: *mut *mut c_char,
) -> EpsentStatus {
    guarded(|| {
        let Some(inst) = inst.as_ref() else {
            set_error("NULL instance handle");
            return EpsentStatus::NullArgument;
        };
        if out_csv.is_null() {
            set_error("NULL out pointer");
            return EpsentStatus::NullArgument;
        }
        match rate_curve(&inst.inner) {
            Ok(curve) => give_string(out_csv, curve.to_csv()),
            Err(e) => fail(e),
        }
    })
}

/// Minimum enclosing ball of `n` points of dimension `dim`, row-major in
/// `points`. Writes the center to `out_center` (length `dim`) and the
/// radius to `out_radius`.
///
/// # Safety
/// `points` must hold n*dim doubles; `out_center` must hold dim doubles;
/// `out_radius` must be valid.
#[no_mangle]
pub unsafe extern "C" fn epsent_min_enclosing_ball(
    points: *const f64,
    n: usize,
    dim: usize,
    out_center: *mut f64,
    out_radius: *mut f64,
) -> EpsentStatus {
    guarded(|| {
        if points.is_null() || out_center.is_null() || out_radius.is_null() {
            set_error("NULL pointer argument");
            return EpsentStatus::NullArgument;
        }
        let flat = std::slice::from_raw_parts(points, n * dim);
        let pts: Vec<Vec<f64>> = flat.chunks(dim).map(|c| c.to_vec()).collect();
        match min_enclosing_ball(&pts) {
            Ok(ball) => {
                std::ptr::copy_nonoverlapping(ball.center.as_ptr(), out_center, dim);
                *out_radius = ball.radius;
                EpsentStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}
