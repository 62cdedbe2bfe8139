//! C ABI over the `pole-ladder` library.
//!
//! Spaces are opaque handles created by [`pl_space_new`] and released by
//! [`pl_space_free`]. Points and tangent vectors are flat `double` arrays of
//! length [`pl_space_coord_len`]; a tangent vector is based at the point
//! passed alongside it. Every call returns a [`PlStatus`]; on failure the
//! message is kept per thread and read with [`pl_last_error_message`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use pole_ladder::ladders::transport_along_geodesic;
use pole_ladder::{geometry, manifolds, ConnectionSpace, GeometryError, LadderScheme, Point, SchemeKind, TangentVector};

/// Opaque connection space.
pub struct PlSpace {
    inner: Box<dyn ConnectionSpace>,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    CutLocus = 4,
    NoConvergence = 5,
    DomainEscape = 6,
    Unsupported = 7,
    /// Any other numerical failure; see the message.
    Numerical = 8,
    Panic = 9,
}

/// Ladder scheme selector.
pub type PlScheme = u32;
pub const PL_SCHEME_SCHILD: PlScheme = 0;
pub const PL_SCHEME_POLE_V1: PlScheme = 1;
pub const PL_SCHEME_POLE_V2: PlScheme = 2;
pub const PL_SCHEME_POLE_ALT: PlScheme = 3;
pub const PL_SCHEME_POLE_AVG: PlScheme = 4;

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(e: &GeometryError) -> PlStatus {
    match e.root() {
        GeometryError::InvalidArgument(_) | GeometryError::InvalidBase { .. } | GeometryError::NotSpd(_) => {
            PlStatus::InvalidArgument
        }
        GeometryError::DimensionMismatch { .. } => PlStatus::DimensionMismatch,
        GeometryError::CutLocus(_) | GeometryError::LogBranch { .. } => PlStatus::CutLocus,
        GeometryError::NoConvergence { .. } => PlStatus::NoConvergence,
        GeometryError::DomainEscape(_) => PlStatus::DomainEscape,
        GeometryError::Unsupported(_) => PlStatus::Unsupported,
        _ => PlStatus::Numerical,
    }
}

struct Fail(PlStatus, String);

impl From<GeometryError> for Fail {
    fn from(e: GeometryError) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

type Body<'a> = Box<dyn FnOnce() -> Result<(), Fail> + 'a>;

/// Runs `body`, turning errors and panics into a status.
fn guard(body: Body<'_>) -> PlStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            set_error(String::new());
            PlStatus::Ok
        }
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("panic: {msg}"));
            PlStatus::Panic
        }
    }
}

fn null(what: &str) -> Fail {
    Fail(PlStatus::NullPointer, format!("{what} is null"))
}

unsafe fn space_ref<'a>(space: *const PlSpace) -> Result<&'a dyn ConnectionSpace, Fail> {
    space.as_ref().map(|s| s.inner.as_ref()).ok_or_else(|| null("space"))
}

unsafe fn read(ptr: *const f64, len: usize, what: &str) -> Result<Vec<f64>, Fail> {
    if ptr.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(ptr, len).to_vec())
}

unsafe fn write(out: *mut f64, values: &[f64]) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null("out"));
    }
    ptr::copy_nonoverlapping(values.as_ptr(), out, values.len());
    Ok(())
}

unsafe fn point(space: &dyn ConnectionSpace, ptr: *const f64, what: &str) -> Result<Point, Fail> {
    Ok(Point::from_slice(&read(ptr, space.coord_len(), what)?))
}

unsafe fn vector(space: &dyn ConnectionSpace, base: &Point, ptr: *const f64, what: &str) -> Result<TangentVector, Fail> {
    Ok(TangentVector::from_slice(base, &read(ptr, space.coord_len(), what)?))
}

fn scheme_kind(scheme: PlScheme) -> Result<SchemeKind, Fail> {
    Ok(match scheme {
        PL_SCHEME_SCHILD => SchemeKind::Schild,
        PL_SCHEME_POLE_V1 => SchemeKind::PoleV1,
        PL_SCHEME_POLE_V2 => SchemeKind::PoleV2,
        PL_SCHEME_POLE_ALT => SchemeKind::PoleAlt,
        PL_SCHEME_POLE_AVG => SchemeKind::PoleAvg,
        other => return Err(Fail(PlStatus::InvalidArgument, format!("unknown scheme {other}"))),
    })
}

/// Builds a space from a registry name (`"sphere-2"`, `"bump2d"`, ...).
///
/// # Safety
/// `name` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pl_space_new(name: *const c_char, out: *mut *mut PlSpace) -> PlStatus {
    guard(Box::new(move || {
        if name.is_null() {
            return Err(null("name"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let name = CStr::from_ptr(name)
            .to_str()
            .map_err(|_| Fail(PlStatus::InvalidArgument, "name is not UTF-8".into()))?;
        let inner = manifolds::from_name(name)?;
        *out = Box::into_raw(Box::new(PlSpace { inner }));
        Ok(())
    }))
}

/// Releases a space. Null is ignored.
///
/// # Safety
/// `space` must come from [`pl_space_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn pl_space_free(space: *mut PlSpace) {
    if !space.is_null() {
        drop(Box::from_raw(space));
    }
}

/// Number of doubles in a point or tangent vector; 0 for a null handle.
///
/// # Safety
/// `space` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pl_space_coord_len(space: *const PlSpace) -> usize {
    space.as_ref().map_or(0, |s| s.inner.coord_len())
}

/// `out = exp_p(v)`.
///
/// # Safety
/// Array arguments must hold `pl_space_coord_len(space)` doubles.
#[no_mangle]
pub unsafe extern "C" fn pl_exp(space: *const PlSpace, p: *const f64, v: *const f64, out: *mut f64) -> PlStatus {
    guard(Box::new(move || {
        let s = space_ref(space)?;
        let p = point(s, p, "p")?;
        let v = vector(s, &p, v, "v")?;
        write(out, geometry::exp(s, &p, &v)?.as_slice())
    }))
}

/// `out = log_p(q)`.
///
/// # Safety
/// Array arguments must hold `pl_space_coord_len(space)` doubles.
#[no_mangle]
pub unsafe extern "C" fn pl_log(space: *const PlSpace, p: *const f64, q: *const f64, out: *mut f64) -> PlStatus {
    guard(Box::new(move || {
        let s = space_ref(space)?;
        let (p, q) = (point(s, p, "p")?, point(s, q, "q")?);
        write(out, geometry::log(s, &p, &q)?.as_slice())
    }))
}

/// Reference transport of `u ∈ T_p` to `q` along the geodesic `[p, q]`.
///
/// # Safety
/// Array arguments must hold `pl_space_coord_len(space)` doubles.
#[no_mangle]
pub unsafe extern "C" fn pl_transport_oracle(
    space: *const PlSpace,
    p: *const f64,
    q: *const f64,
    u: *const f64,
    out: *mut f64,
) -> PlStatus {
    guard(Box::new(move || {
        let s = space_ref(space)?;
        let (p, q) = (point(s, p, "p")?, point(s, q, "q")?);
        let u = vector(s, &p, u, "u")?;
        write(out, geometry::transport_oracle(s, &u, &q)?.as_slice())
    }))
}

/// Midpoint of the geodesic `[p, q]`.
///
/// # Safety
/// Array arguments must hold `pl_space_coord_len(space)` doubles.
#[no_mangle]
pub unsafe extern "C" fn pl_midpoint(space: *const PlSpace, p: *const f64, q: *const f64, out: *mut f64) -> PlStatus {
    guard(Box::new(move || {
        let s = space_ref(space)?;
        let (p, q) = (point(s, p, "p")?, point(s, q, "q")?);
        write(out, geometry::midpoint(s, &p, &q)?.as_slice())
    }))
}

/// `out = s_m(p)`.
///
/// # Safety
/// Array arguments must hold `pl_space_coord_len(space)` doubles.
#[no_mangle]
pub unsafe extern "C" fn pl_geodesic_symmetry(
    space: *const PlSpace,
    m: *const f64,
    p: *const f64,
    out: *mut f64,
) -> PlStatus {
    guard(Box::new(move || {
        let s = space_ref(space)?;
        let (m, p) = (point(s, m, "m")?, point(s, p, "p")?);
        write(out, geometry::geodesic_symmetry(s, &m, &p)?.as_slice())
    }))
}

/// One ladder step carrying `u ∈ T_p` to `q`.
///
/// # Safety
/// Array arguments must hold `pl_space_coord_len(space)` doubles.
#[no_mangle]
pub unsafe extern "C" fn pl_ladder_step(
    space: *const PlSpace,
    scheme: PlScheme,
    p: *const f64,
    q: *const f64,
    u: *const f64,
    out: *mut f64,
) -> PlStatus {
    guard(Box::new(move || {
        let s = space_ref(space)?;
        let kind = scheme_kind(scheme)?;
        let (p, q) = (point(s, p, "p")?, point(s, q, "q")?);
        let u = vector(s, &p, u, "u")?;
        write(out, kind.step(s, &p, &q, &u)?.as_slice())
    }))
}

/// Transport of `u ∈ T_p` to `q` with `n_rungs` ladder rungs along `[p, q]`.
///
/// # Safety
/// Array arguments must hold `pl_space_coord_len(space)` doubles.
#[no_mangle]
pub unsafe extern "C" fn pl_transport_along_geodesic(
    space: *const PlSpace,
    scheme: PlScheme,
    p: *const f64,
    q: *const f64,
    u: *const f64,
    n_rungs: usize,
    out: *mut f64,
) -> PlStatus {
    guard(Box::new(move || {
        let s = space_ref(space)?;
        let kind = scheme_kind(scheme)?;
        let (p, q) = (point(s, p, "p")?, point(s, q, "q")?);
        let u = vector(s, &p, u, "u")?;
        let scheme = LadderScheme::for_rungs(kind, n_rungs.max(1));
        let result = transport_along_geodesic(s, &p, &q, &u, n_rungs, &scheme)?;
        write(out, result.vector.as_slice())
    }))
}

/// Copies the calling thread's last error message into `buf` (truncated,
/// always NUL-terminated when `len > 0`). Returns the full message length
/// without the terminator.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn pl_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            ptr::copy_nonoverlapping(msg.as_ptr() as *const c_char, buf, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Static name of a status code.
#[no_mangle]
pub extern "C" fn pl_status_name(status: PlStatus) -> *const c_char {
    let s: &'static [u8] = match status {
        PlStatus::Ok => b"Ok\0",
        PlStatus::NullPointer => b"NullPointer\0",
        PlStatus::InvalidArgument => b"InvalidArgument\0",
        PlStatus::DimensionMismatch => b"DimensionMismatch\0",
        PlStatus::CutLocus => b"CutLocus\0",
        PlStatus::NoConvergence => b"NoConvergence\0",
        PlStatus::DomainEscape => b"DomainEscape\0",
        PlStatus::Unsupported => b"Unsupported\0",
        PlStatus::Numerical => b"Numerical\0",
        PlStatus::Panic => b"Panic\0",
    };
    s.as_ptr() as *const c_char
}
