//! C ABI over the niaas engine.
//!
//! Handles are opaque pointers owned by the caller and released with the
//! matching `_free` function. Every fallible call returns a [`NiaasStatus`];
//! on failure a human-readable message is available from
//! [`niaas_last_error`] on the same thread until the next call. Strings handed
//! out through `char **` parameters are heap allocated and must be released
//! with [`niaas_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use chrono::{DateTime, Utc};
use niaas::actors::{SliceError, World, WorldError};
use niaas::embed::{shortest_valid_path, Constraints, PathRequest, DEFAULT_ATTEMPT_LIMIT};
use niaas::graphstore::{parse_document, resolve_name, serialize_document, Model};
use niaas::rules;
use niaas::vocab::{self, ns::terms};

/// Result codes shared by every entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NiaasStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    SyntaxError = 3,
    Violation = 4,
    NoPath = 5,
    SliceError = 6,
    UnknownSlice = 7,
    Internal = 8,
}

/// An RDF model.
pub struct NiaasModel {
    inner: Model,
}

/// A controller, broker and aggregate managers sharing one clock.
pub struct NiaasWorld {
    inner: World,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let text = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).ok());
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

type FfiResult = Result<(), (NiaasStatus, String)>;

fn fail<T>(status: NiaasStatus, msg: impl ToString) -> Result<T, (NiaasStatus, String)> {
    Err((status, msg.to_string()))
}

/// Runs `f`, translating errors and panics into a status code.
fn guard(f: impl FnOnce() -> FfiResult) -> NiaasStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => NiaasStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            NiaasStatus::Internal
        }
    }
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, (NiaasStatus, String)> {
    if p.is_null() {
        return fail(NiaasStatus::NullArgument, format!("{what} is null"));
    }
    CStr::from_ptr(p).to_str().or_else(|_| fail(NiaasStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn opt_str<'a>(p: *const c_char, what: &str) -> Result<Option<&'a str>, (NiaasStatus, String)> {
    if p.is_null() {
        Ok(None)
    } else {
        read_str(p, what).map(Some)
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, (NiaasStatus, String)> {
    p.as_ref().ok_or_else(|| (NiaasStatus::NullArgument, format!("{what} is null")))
}

unsafe fn deref_mut<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, (NiaasStatus, String)> {
    p.as_mut().ok_or_else(|| (NiaasStatus::NullArgument, format!("{what} is null")))
}

unsafe fn put_string(out: *mut *mut c_char, s: String) -> FfiResult {
    let c = CString::new(s.replace('\0', " ")).or_else(|e| fail(NiaasStatus::Internal, e))?;
    *out = c.into_raw();
    Ok(())
}

unsafe fn put_model(out: *mut *mut NiaasModel, m: Model) {
    *out = Box::into_raw(Box::new(NiaasModel { inner: m }));
}

fn check_out<T>(out: *mut *mut T, what: &str) -> FfiResult {
    if out.is_null() {
        return fail(NiaasStatus::NullArgument, format!("{what} is null"));
    }
    Ok(())
}

/// Message describing the most recent failure on this thread, or null.
/// The pointer stays valid until the next call into this library.
#[no_mangle]
pub extern "C" fn niaas_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and must not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn niaas_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses an NDL-Lite document.
///
/// # Safety
/// `text` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn niaas_model_parse(text: *const c_char, out: *mut *mut NiaasModel) -> NiaasStatus {
    guard(|| {
        check_out(out, "out")?;
        let text = read_str(text, "text")?;
        let m = parse_document(text).or_else(|e| fail(NiaasStatus::SyntaxError, e))?;
        put_model(out, m);
        Ok(())
    })
}

/// Releases a model. Null is ignored.
///
/// # Safety
/// `model` must come from this library and must not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn niaas_model_free(model: *mut NiaasModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Number of triples, or 0 for a null handle.
///
/// # Safety
/// `model` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn niaas_model_len(model: *const NiaasModel) -> usize {
    model.as_ref().map_or(0, |m| m.inner.len())
}

/// Serializes a model back to canonical NDL-Lite text.
///
/// # Safety
/// `model` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn niaas_model_serialize(model: *const NiaasModel, out: *mut *mut c_char) -> NiaasStatus {
    guard(|| {
        check_out(out, "out")?;
        let m = deref(model, "model")?;
        put_string(out, serialize_document(&m.inner))
    })
}

/// Merges the model with the built-in schema and computes its closure.
///
/// # Safety
/// `model` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn niaas_model_entail(model: *const NiaasModel, out: *mut *mut NiaasModel) -> NiaasStatus {
    guard(|| {
        check_out(out, "out")?;
        let m = deref(model, "model")?;
        let closed = vocab::closure_with_schema(&m.inner, []).or_else(|e| fail(NiaasStatus::Internal, e))?;
        put_model(out, closed);
        Ok(())
    })
}

/// Validates a request model. Writes one `ISSUE` or `VIOLATION` line per
/// finding to `report` (possibly empty) and returns `Violation` when there
/// is at least one finding.
///
/// # Safety
/// `model` must be a live handle; `report` must be writable.
#[no_mangle]
pub unsafe extern "C" fn niaas_model_validate(model: *const NiaasModel, report: *mut *mut c_char) -> NiaasStatus {
    guard(|| {
        check_out(report, "report")?;
        let m = deref(model, "model")?;
        let closed = vocab::closure_with_schema(&m.inner, []).or_else(|e| fail(NiaasStatus::Internal, e))?;
        let issues = vocab::validate_conformance(&closed);
        let violations = rules::validate_request(&closed, &[]).or_else(|e| fail(NiaasStatus::Internal, e))?;
        let mut text = String::new();
        for i in &issues {
            text += &format!("ISSUE {i}\n");
        }
        for v in &violations {
            text += &format!("{v}\n");
        }
        let n = issues.len() + violations.len();
        put_string(report, text)?;
        if n > 0 {
            return fail(NiaasStatus::Violation, format!("{n} finding(s)"));
        }
        Ok(())
    })
}

/// Finds the shortest valid path between two elements of a substrate.
/// `layer` may be null for Ethernet. Names may be `<iri>` or a CURIE known to
/// the model. On success `listing` receives `HOP`, `INTERNAL` and `LABEL`
/// lines; `NoPath` is returned when no path satisfies the constraints.
///
/// # Safety
/// Pointers must be live and NUL-terminated where they are strings;
/// `listing` must be writable.
#[no_mangle]
pub unsafe extern "C" fn niaas_shortest_path(
    substrate: *const NiaasModel,
    from: *const c_char,
    to: *const c_char,
    layer: *const c_char,
    bandwidth: i64,
    listing: *mut *mut c_char,
) -> NiaasStatus {
    guard(|| {
        check_out(listing, "listing")?;
        let m = deref(substrate, "substrate")?;
        let closed = vocab::closure_with_schema(&m.inner, []).or_else(|e| fail(NiaasStatus::Internal, e))?;
        let name = |s: &str| resolve_name(s, &closed).or_else(|e| fail(NiaasStatus::SyntaxError, e));
        let source = name(read_str(from, "from")?)?;
        let dest = name(read_str(to, "to")?)?;
        let layer = match opt_str(layer, "layer")? {
            Some(l) => name(l)?,
            None => terms().ethernet.clone(),
        };
        let req = PathRequest { source, dest, constraints: Constraints { layer: layer.clone(), bandwidth, required_label: None } };
        match shortest_valid_path(&closed, &req, DEFAULT_ATTEMPT_LIMIT) {
            Some(p) => put_string(listing, p.listing(&layer)),
            None => fail(NiaasStatus::NoPath, "no path satisfies the constraints"),
        }
    })
}

/// Creates an empty world whose clock starts at the UNIX epoch.
#[no_mangle]
pub extern "C" fn niaas_world_new() -> *mut NiaasWorld {
    Box::into_raw(Box::new(NiaasWorld { inner: World::new() }))
}

/// Releases a world. Null is ignored.
///
/// # Safety
/// `world` must come from this library and must not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn niaas_world_free(world: *mut NiaasWorld) {
    if !world.is_null() {
        drop(Box::from_raw(world));
    }
}

/// Moves the clock forward to an RFC 3339 instant, expiring due slices.
///
/// # Safety
/// `world` must be a live handle; `instant` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn niaas_world_advance_time(world: *mut NiaasWorld, instant: *const c_char) -> NiaasStatus {
    guard(|| {
        let w = deref_mut(world, "world")?;
        let t = DateTime::parse_from_rfc3339(read_str(instant, "instant")?)
            .or_else(|e| fail(NiaasStatus::SyntaxError, e))?
            .with_timezone(&Utc);
        w.inner.advance_time(t).map(drop).or_else(|e| fail(NiaasStatus::SliceError, e))
    })
}

/// Hands a substrate to a new aggregate manager and delegates it to the broker.
///
/// # Safety
/// Both handles must be live.
#[no_mangle]
pub unsafe extern "C" fn niaas_world_load_substrate(world: *mut NiaasWorld, substrate: *const NiaasModel) -> NiaasStatus {
    guard(|| {
        let w = deref_mut(world, "world")?;
        let m = deref(substrate, "substrate")?;
        w.inner.load_substrate(&m.inner).map(drop).or_else(|e| fail(NiaasStatus::SliceError, e))
    })
}

/// Runs the full slice creation protocol. On success `manifest` (if not null)
/// receives a copy of the manifest. Validation failures return `Violation`;
/// other failures return `SliceError`.
///
/// # Safety
/// Handles must be live; `slice` NUL-terminated; `manifest` null or writable.
#[no_mangle]
pub unsafe extern "C" fn niaas_world_create_slice(
    world: *mut NiaasWorld,
    slice: *const c_char,
    request: *const NiaasModel,
    manifest: *mut *mut NiaasModel,
) -> NiaasStatus {
    guard(|| {
        let w = deref_mut(world, "world")?;
        let id = read_str(slice, "slice")?;
        let r = deref(request, "request")?;
        match w.inner.create_slice(id, &r.inner) {
            Ok(m) => {
                if !manifest.is_null() {
                    put_model(manifest, m.clone());
                }
                Ok(())
            }
            Err(e @ SliceError::Validation { .. }) => fail(NiaasStatus::Violation, e),
            Err(e) => fail(NiaasStatus::SliceError, e),
        }
    })
}

/// Tears a slice down and releases its resources.
///
/// # Safety
/// `world` must be live; `slice` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn niaas_world_delete_slice(world: *mut NiaasWorld, slice: *const c_char) -> NiaasStatus {
    guard(|| {
        let w = deref_mut(world, "world")?;
        let id = read_str(slice, "slice")?;
        match w.inner.delete_slice(id) {
            Ok(()) => Ok(()),
            Err(e @ WorldError::UnknownSlice(_)) => fail(NiaasStatus::UnknownSlice, e),
            Err(e) => fail(NiaasStatus::SliceError, e),
        }
    })
}

/// Writes the slice's lifecycle state name (for example `Provisioned`).
///
/// # Safety
/// `world` must be live; `slice` NUL-terminated; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn niaas_world_slice_state(
    world: *const NiaasWorld,
    slice: *const c_char,
    out: *mut *mut c_char,
) -> NiaasStatus {
    guard(|| {
        check_out(out, "out")?;
        let w = deref(world, "world")?;
        let id = read_str(slice, "slice")?;
        match w.inner.slice_state(id) {
            Some(s) => put_string(out, s.to_string()),
            None => fail(NiaasStatus::UnknownSlice, format!("unknown slice {id}")),
        }
    })
}

/// Writes the event log, one event per line.
///
/// # Safety
/// `world` must be live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn niaas_world_log(world: *const NiaasWorld, out: *mut *mut c_char) -> NiaasStatus {
    guard(|| {
        check_out(out, "out")?;
        let w = deref(world, "world")?;
        put_string(out, w.inner.log_text())
    })
}
