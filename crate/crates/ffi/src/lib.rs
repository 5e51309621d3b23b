//! C interface to the capacity-torsion library.
//!
//! Bodies are opaque handles created by the `ct_body_*` constructors and
//! released with [`ct_body_free`]. Every function returns a [`CtStatus`];
//! results are written through out-pointers only on success. After a failure
//! [`ct_last_error`] describes it until the next call on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use capacity_torsion::bounds;
use capacity_torsion::exact::{self, QuadratureConfig};
use capacity_torsion::geometry::{AxisVector, Body};
use capacity_torsion::montecarlo::{self, WosConfig};
use capacity_torsion::Error;

/// Status codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CtStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    /// The operation needs a larger dimension (capacity needs d ≥ 3).
    Dimension = 3,
    /// Quadrature, hull or enclosing-ellipsoid failure.
    Numeric = 4,
    NotApplicable = 5,
    UnsupportedBody = 6,
    Panic = 7,
}

/// Opaque body handle.
pub struct CtBody(Body);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> CtStatus {
    match e {
        Error::DimensionTooSmall { .. } | Error::DimensionMismatch { .. } => CtStatus::Dimension,
        Error::ToleranceNotMet { .. }
        | Error::MveeNoConvergence { .. }
        | Error::Hull(_)
        | Error::LinearProgram(_) => CtStatus::Numeric,
        Error::NotApplicable(_) => CtStatus::NotApplicable,
        Error::UnsupportedBody(_) => CtStatus::UnsupportedBody,
        _ => CtStatus::InvalidArgument,
    }
}

struct Fail(CtStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(CtStatus::NullPointer, format!("{what} is null"))
}

/// Runs `f`, converting errors and panics into a status.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> CtStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            CtStatus::Ok
        }
        Ok(Err(Fail(status, msg))) => {
            set_error(&msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(&format!("internal error: {msg}"));
            CtStatus::Panic
        }
    }
}

unsafe fn write<T>(out: *mut T, value: T, what: &str) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

unsafe fn axes_from(ptr: *const f64, d: usize) -> Result<AxisVector, Fail> {
    if ptr.is_null() {
        return Err(null("axes"));
    }
    if d == 0 {
        return Err(Fail(CtStatus::InvalidArgument, "need at least one axis".into()));
    }
    Ok(AxisVector::new(std::slice::from_raw_parts(ptr, d).to_vec())?)
}

unsafe fn body_ref<'a>(body: *const CtBody) -> Result<&'a Body, Fail> {
    body.as_ref().map(|b| &b.0).ok_or_else(|| null("body"))
}

fn into_handle(body: Body) -> *mut CtBody {
    Box::into_raw(Box::new(CtBody(body)))
}

/// Message describing the most recent failure on this thread, or an empty
/// string. Valid until the next library call on the thread.
#[no_mangle]
pub extern "C" fn ct_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ct_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parses a body document (`{"kind": "ellipsoid", "axes": [...]}` and so
/// on). `default_dim` is used for balls without `dim` or `center`; pass 0
/// for none.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ct_body_from_json(json: *const c_char, default_dim: usize, out: *mut *mut CtBody) -> CtStatus {
    guard(|| {
        if json.is_null() {
            return Err(null("json"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let text = CStr::from_ptr(json)
            .to_str()
            .map_err(|_| Fail(CtStatus::InvalidArgument, "json is not UTF-8".into()))?;
        let body = Body::from_json(text, (default_dim > 0).then_some(default_dim))?;
        write(out, into_handle(body), "out")
    })
}

/// Centred ellipsoid with the given semi-axes.
///
/// # Safety
/// `axes` must point to `d` doubles and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn ct_body_ellipsoid(axes: *const f64, d: usize, out: *mut *mut CtBody) -> CtStatus {
    guard(|| {
        let a = axes_from(axes, d)?;
        write(out, into_handle(Body::ellipsoid(a)), "out")
    })
}

/// Centred ball of radius `radius` in dimension `d`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ct_body_ball(d: usize, radius: f64, out: *mut *mut CtBody) -> CtStatus {
    guard(|| write(out, into_handle(Body::ball(d, radius)?), "out"))
}

/// Convex hull of `n` points of dimension `d`, stored row by row.
///
/// # Safety
/// `points` must point to `n * d` doubles and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn ct_body_polytope(points: *const f64, n: usize, d: usize, out: *mut *mut CtBody) -> CtStatus {
    guard(|| {
        if points.is_null() {
            return Err(null("points"));
        }
        let len = n
            .checked_mul(d)
            .ok_or_else(|| Fail(CtStatus::InvalidArgument, "n * d overflows".into()))?;
        let flat = std::slice::from_raw_parts(points, len);
        let vertices = flat.chunks(d.max(1)).map(<[f64]>::to_vec).collect();
        write(out, into_handle(Body::polytope(vertices)?), "out")
    })
}

/// Releases a handle; null is ignored.
///
/// # Safety
/// `body` must come from a `ct_body_*` constructor and not be used again.
#[no_mangle]
pub unsafe extern "C" fn ct_body_free(body: *mut CtBody) {
    if !body.is_null() {
        let _ = catch_unwind(AssertUnwindSafe(|| drop(Box::from_raw(body))));
    }
}

/// # Safety
/// `body` must be a live handle and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn ct_body_dim(body: *const CtBody, out: *mut usize) -> CtStatus {
    guard(|| write(out, body_ref(body)?.dim(), "out"))
}

/// # Safety
/// `body` must be a live handle and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn ct_body_volume(body: *const CtBody, out: *mut f64) -> CtStatus {
    guard(|| write(out, body_ref(body)?.volume()?, "out"))
}

/// The elliptic integral 𝔢(a) with the default quadrature settings.
///
/// # Safety
/// `axes` must point to `d` doubles and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn ct_efrak(axes: *const f64, d: usize, out: *mut f64) -> CtStatus {
    guard(|| {
        let a = axes_from(axes, d)?;
        write(out, exact::efrak(&a, &QuadratureConfig::default())?, "out")
    })
}

/// Newtonian capacity of the closed ellipsoid (d ≥ 3).
///
/// # Safety
/// `axes` must point to `d` doubles and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn ct_cap_ellipsoid(axes: *const f64, d: usize, out: *mut f64) -> CtStatus {
    guard(|| {
        let a = axes_from(axes, d)?;
        if d < 3 {
            return Err(Error::DimensionTooSmall { what: "Newtonian capacity", required: 3, got: d }.into());
        }
        write(out, exact::cap_ellipsoid(&a, &QuadratureConfig::default())?, "out")
    })
}

/// Torsional rigidity of the ellipsoid.
///
/// # Safety
/// `axes` must point to `d` doubles and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn ct_torsion_ellipsoid(axes: *const f64, d: usize, out: *mut f64) -> CtStatus {
    guard(|| {
        let a = axes_from(axes, d)?;
        write(out, exact::torsion_ellipsoid(&a), "out")
    })
}

/// G_q of the ellipsoid (d ≥ 3).
///
/// # Safety
/// `axes` must point to `d` doubles and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn ct_g_q_ellipsoid(axes: *const f64, d: usize, q: f64, out: *mut f64) -> CtStatus {
    guard(|| {
        let a = axes_from(axes, d)?;
        write(out, exact::g_q_ellipsoid(&a, q, &QuadratureConfig::default())?.g_q, "out")
    })
}

/// G_q of the unit ball in dimension `d ≥ 3`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ct_g_q_ball(d: usize, q: f64, out: *mut f64) -> CtStatus {
    guard(|| write(out, exact::g_q_ball(d, q)?, "out"))
}

/// H_q of the ellipse with semi-axes `a1`, `a2`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ct_h_q_ellipse(a1: f64, a2: f64, q: f64, out: *mut f64) -> CtStatus {
    guard(|| write(out, exact::h_q_ellipse(a1.max(a2), a1.min(a2), q)?.h_q, "out"))
}

/// Certified interval for G_q of a convex body.
///
/// # Safety
/// `body` must be a live handle; `lower` and `upper` must be valid.
#[no_mangle]
pub unsafe extern "C" fn ct_sandwich_g_q(body: *const CtBody, q: f64, lower: *mut f64, upper: *mut f64) -> CtStatus {
    guard(|| {
        if lower.is_null() || upper.is_null() {
            return Err(null("lower/upper"));
        }
        let s = bounds::sandwich_g_q(body_ref(body)?, q, &QuadratureConfig::default())?;
        write(lower, s.lower, "lower")?;
        write(upper, s.upper, "upper")
    })
}

fn wos_config(walkers: u64, seed: u64) -> Result<WosConfig, Fail> {
    let walkers = usize::try_from(walkers).map_err(|_| Fail(CtStatus::InvalidArgument, "too many walkers".into()))?;
    Ok(WosConfig {
        walkers,
        seed,
        ..WosConfig::default()
    })
}

/// Walk-on-spheres capacity estimate with default shell and radii.
///
/// # Safety
/// `body` must be a live handle; `value` and `std_error` must be valid.
#[no_mangle]
pub unsafe extern "C" fn ct_wos_capacity(
    body: *const CtBody,
    walkers: u64,
    seed: u64,
    value: *mut f64,
    std_error: *mut f64,
) -> CtStatus {
    guard(|| {
        if value.is_null() || std_error.is_null() {
            return Err(null("value/std_error"));
        }
        let e = montecarlo::wos_capacity(body_ref(body)?, &wos_config(walkers, seed)?)?;
        write(value, e.value, "value")?;
        write(std_error, e.std_error, "std_error")
    })
}

/// Walk-on-spheres torsion estimate with the default shell.
///
/// # Safety
/// `body` must be a live handle; `value` and `std_error` must be valid.
#[no_mangle]
pub unsafe extern "C" fn ct_wos_torsion(
    body: *const CtBody,
    walkers: u64,
    seed: u64,
    value: *mut f64,
    std_error: *mut f64,
) -> CtStatus {
    guard(|| {
        if value.is_null() || std_error.is_null() {
            return Err(null("value/std_error"));
        }
        let e = montecarlo::wos_torsion(body_ref(body)?, &wos_config(walkers, seed)?)?;
        write(value, e.value, "value")?;
        write(std_error, e.std_error, "std_error")
    })
}

/// Writes the body document as JSON into `buf` (NUL-terminated, at most
/// `len` bytes) and the required size including the NUL into `needed`.
/// Returns `InvalidArgument` when `buf` is too small; `buf` may be null to
/// query the size.
///
/// # Safety
/// `body` must be a live handle, `buf` valid for `len` bytes or null, and
/// `needed` valid.
#[no_mangle]
pub unsafe extern "C" fn ct_body_to_json(
    body: *const CtBody,
    buf: *mut c_char,
    len: usize,
    needed: *mut usize,
) -> CtStatus {
    guard(|| {
        let text = body_ref(body)?.to_json();
        write(needed, text.len() + 1, "needed")?;
        if buf.is_null() {
            return Ok(());
        }
        if len < text.len() + 1 {
            return Err(Fail(CtStatus::InvalidArgument, format!("buffer holds {len} bytes, need {}", text.len() + 1)));
        }
        ptr::copy_nonoverlapping(text.as_ptr().cast(), buf, text.len());
        buf.add(text.len()).write(0);
        Ok(())
    })
}
