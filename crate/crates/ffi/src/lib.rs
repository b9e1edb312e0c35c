//! C interface to `sqztomo`.
//!
//! Every fallible function returns an [`SqzStatus`]; on failure the message is
//! available from [`sqz_last_error`] on the same thread until the next call.
//! Handles are opaque and must be released with their `_free` function.
//! Arrays are passed as pointer plus length, and output buffers that are too
//! short leave the buffer untouched and return `SQZ_BUFFER_TOO_SMALL`.

#![allow(non_camel_case_types)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use sqztomo::dynamics::kanai_moments;
use sqztomo::states::make_density;
use sqztomo::tomography::{optical_tomogram, route_tomogram, Route, RouteOptions};
use sqztomo::{Complex64, Error, SqueezeTomogram, StateSpec, TomographyFrame};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SqzStatus {
    SQZ_OK = 0,
    SQZ_NULL_POINTER = 1,
    SQZ_INVALID_ARGUMENT = 2,
    SQZ_TRUNCATION = 3,
    SQZ_NUMERICAL = 4,
    SQZ_BUFFER_TOO_SMALL = 5,
    SQZ_PANIC = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SqzRoute {
    SQZ_ROUTE_ORACLE = 0,
    SQZ_ROUTE_CLOSED_FORM = 1,
    SQZ_ROUTE_KERNEL_DENSITY = 2,
    SQZ_ROUTE_KERNEL_WIGNER = 3,
    SQZ_ROUTE_KERNEL_SYMPLECTIC = 4,
}

impl From<SqzRoute> for Route {
    fn from(r: SqzRoute) -> Self {
        match r {
            SqzRoute::SQZ_ROUTE_ORACLE => Route::Oracle,
            SqzRoute::SQZ_ROUTE_CLOSED_FORM => Route::ClosedForm,
            SqzRoute::SQZ_ROUTE_KERNEL_DENSITY => Route::Kernel22,
            SqzRoute::SQZ_ROUTE_KERNEL_WIGNER => Route::Kernel24,
            SqzRoute::SQZ_ROUTE_KERNEL_SYMPLECTIC => Route::KernelEqnew04,
        }
    }
}

/// Gaussian moments of the damped oscillator; `sigma_*` are variances.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SqzMoments {
    pub t: f64,
    pub mean_q: f64,
    pub mean_p: f64,
    pub sigma_q: f64,
    pub sigma_p: f64,
    pub sigma_pq: f64,
}

/// A parsed state description.
pub struct SqzState {
    spec: StateSpec,
}

/// A computed squeeze tomogram, frames ordered theta-major.
pub struct SqzTomogram {
    inner: SqueezeTomogram,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> SqzStatus {
    match e {
        Error::TailMass { .. } | Error::TruncationLeakage { .. } => SqzStatus::SQZ_TRUNCATION,
        Error::InvalidParameter { .. }
        | Error::Parse(_)
        | Error::CutoffTooSmall(_)
        | Error::DimensionMismatch { .. }
        | Error::SingularKernel { .. }
        | Error::OutsideFrameImage { .. } => SqzStatus::SQZ_INVALID_ARGUMENT,
        _ => SqzStatus::SQZ_NUMERICAL,
    }
}

fn fail(status: SqzStatus, msg: impl Into<String>) -> SqzStatus {
    set_error(msg.into());
    status
}

fn guard(f: impl FnOnce() -> Result<(), SqzStatus>) -> SqzStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            SqzStatus::SQZ_OK
        }
        Ok(Err(s)) => s,
        Err(_) => fail(SqzStatus::SQZ_PANIC, "internal panic"),
    }
}

fn lift<T>(r: sqztomo::Result<T>) -> Result<T, SqzStatus> {
    r.map_err(|e| fail(status_of(&e), e.to_string()))
}

unsafe fn input<'a, T>(p: *const T, len: usize, name: &str) -> Result<&'a [T], SqzStatus> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(fail(SqzStatus::SQZ_NULL_POINTER, format!("{name} is null")));
    }
    // SAFETY: the caller guarantees `p` points to `len` readable elements.
    Ok(unsafe { slice::from_raw_parts(p, len) })
}

unsafe fn copy_out(src: &[f64], out: *mut f64, len: usize) -> Result<(), SqzStatus> {
    if out.is_null() {
        return Err(fail(SqzStatus::SQZ_NULL_POINTER, "output buffer is null"));
    }
    if len < src.len() {
        return Err(fail(SqzStatus::SQZ_BUFFER_TOO_SMALL, format!("buffer holds {len}, need {}", src.len())));
    }
    // SAFETY: `out` has room for `len >= src.len()` elements.
    unsafe { ptr::copy_nonoverlapping(src.as_ptr(), out, src.len()) };
    Ok(())
}

/// Message of the last failed call on this thread, or NULL. Valid until the
/// next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn sqz_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn sqz_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parses `vacuum`, `fock:M`, `coherent:A`, `cat:A:+`, `cat:A:-`,
/// `thermal:T` or the JSON form into a new state handle.
///
/// # Safety
/// `spec` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sqz_state_parse(spec: *const c_char, out: *mut *mut SqzState) -> SqzStatus {
    guard(|| {
        if spec.is_null() || out.is_null() {
            return Err(fail(SqzStatus::SQZ_NULL_POINTER, "spec or out is null"));
        }
        // SAFETY: checked non-null; the caller guarantees NUL termination.
        let text = unsafe { CStr::from_ptr(spec) }
            .to_str()
            .map_err(|_| fail(SqzStatus::SQZ_INVALID_ARGUMENT, "state spec is not UTF-8"))?;
        let spec: StateSpec = lift(text.parse())?;
        // SAFETY: `out` is non-null and writable per the contract.
        unsafe { *out = Box::into_raw(Box::new(SqzState { spec })) };
        Ok(())
    })
}

/// # Safety
/// `state` must come from [`sqz_state_parse`] or be NULL.
#[no_mangle]
pub unsafe extern "C" fn sqz_state_free(state: *mut SqzState) {
    if !state.is_null() {
        // SAFETY: allocated by `Box::into_raw` in `sqz_state_parse`.
        drop(unsafe { Box::from_raw(state) });
    }
}

/// Squeeze tomogram on the grid `thetas x lambdas` (theta-major), `n <= n_max`.
/// `cutoff` is the Fock dimension for the oracle and kernel routes.
///
/// # Safety
/// Array arguments must point to the stated number of elements; `out` must
/// be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sqz_tomogram_compute(
    state: *const SqzState,
    route: SqzRoute,
    lambdas: *const f64,
    n_lambdas: usize,
    thetas: *const f64,
    n_thetas: usize,
    n_max: usize,
    cutoff: usize,
    out: *mut *mut SqzTomogram,
) -> SqzStatus {
    guard(|| {
        if state.is_null() || out.is_null() {
            return Err(fail(SqzStatus::SQZ_NULL_POINTER, "state or out is null"));
        }
        // SAFETY: pointer/length pairs are valid per the contract.
        let (ls, ts) = unsafe { (input(lambdas, n_lambdas, "lambdas")?, input(thetas, n_thetas, "thetas")?) };
        if ls.is_empty() || ts.is_empty() {
            return Err(fail(SqzStatus::SQZ_INVALID_ARGUMENT, "empty lambda or theta grid"));
        }
        if ls.iter().chain(ts).any(|x| !x.is_finite()) {
            return Err(fail(SqzStatus::SQZ_INVALID_ARGUMENT, "non-finite frame parameter"));
        }
        let frames: Vec<TomographyFrame> =
            ts.iter().flat_map(|&t| ls.iter().map(move |&l| TomographyFrame::new(l, t))).collect();
        let opts = RouteOptions { cutoff, ..RouteOptions::default() };
        // SAFETY: `state` is a live handle.
        let spec = unsafe { &(*state).spec };
        let inner = lift(route_tomogram(spec, route.into(), &frames, n_max, &opts))?;
        // SAFETY: `out` is non-null and writable.
        unsafe { *out = Box::into_raw(Box::new(SqzTomogram { inner })) };
        Ok(())
    })
}

/// # Safety
/// `tomogram` must come from [`sqz_tomogram_compute`] or be NULL.
#[no_mangle]
pub unsafe extern "C" fn sqz_tomogram_free(tomogram: *mut SqzTomogram) {
    if !tomogram.is_null() {
        // SAFETY: allocated by `Box::into_raw` in `sqz_tomogram_compute`.
        drop(unsafe { Box::from_raw(tomogram) });
    }
}

/// Number of frames; 0 for NULL.
///
/// # Safety
/// `tomogram` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn sqz_tomogram_frames(tomogram: *const SqzTomogram) -> usize {
    // SAFETY: live handle or NULL.
    unsafe { tomogram.as_ref() }.map_or(0, |t| t.inner.frames.len())
}

/// `n_max`; 0 for NULL.
///
/// # Safety
/// `tomogram` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn sqz_tomogram_n_max(tomogram: *const SqzTomogram) -> usize {
    // SAFETY: live handle or NULL.
    unsafe { tomogram.as_ref() }.map_or(0, |t| t.inner.n_max)
}

/// Copies `W[f][n]` row-major into `out`, which must hold
/// `frames * (n_max + 1)` values.
///
/// # Safety
/// `tomogram` must be a live handle and `out` must have room for `len` values.
#[no_mangle]
pub unsafe extern "C" fn sqz_tomogram_values(tomogram: *const SqzTomogram, out: *mut f64, len: usize) -> SqzStatus {
    guard(|| {
        // SAFETY: live handle or NULL.
        let t = unsafe { tomogram.as_ref() }.ok_or_else(|| fail(SqzStatus::SQZ_NULL_POINTER, "tomogram is null"))?;
        let flat: Vec<f64> = t.inner.values.iter().flatten().copied().collect();
        // SAFETY: `out` holds `len` values per the contract.
        unsafe { copy_out(&flat, out, len) }
    })
}

/// Copies the per-frame tail mass into `out` (length at least `frames`).
///
/// # Safety
/// `tomogram` must be a live handle and `out` must have room for `len` values.
#[no_mangle]
pub unsafe extern "C" fn sqz_tomogram_tail_mass(tomogram: *const SqzTomogram, out: *mut f64, len: usize) -> SqzStatus {
    guard(|| {
        // SAFETY: live handle or NULL.
        let t = unsafe { tomogram.as_ref() }.ok_or_else(|| fail(SqzStatus::SQZ_NULL_POINTER, "tomogram is null"))?;
        // SAFETY: `out` holds `len` values per the contract.
        unsafe { copy_out(&t.inner.tail_mass, out, len) }
    })
}

/// Optical tomogram `w(x, theta)` of the state truncated to `cutoff` levels.
///
/// # Safety
/// `state` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sqz_optical_tomogram(
    state: *const SqzState,
    cutoff: usize,
    x: f64,
    theta: f64,
    out: *mut f64,
) -> SqzStatus {
    guard(|| {
        // SAFETY: live handle or NULL.
        let s = unsafe { state.as_ref() }.ok_or_else(|| fail(SqzStatus::SQZ_NULL_POINTER, "state is null"))?;
        if out.is_null() {
            return Err(fail(SqzStatus::SQZ_NULL_POINTER, "out is null"));
        }
        let rho = lift(make_density(&s.spec, cutoff))?;
        // SAFETY: `out` is non-null.
        unsafe { *out = optical_tomogram(&rho, x, theta) };
        Ok(())
    })
}

/// Moments of the damped-oscillator state with amplitude `alpha` at time `t`,
/// `0 <= gamma < 1`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sqz_kanai_moments(
    gamma: f64,
    alpha_re: f64,
    alpha_im: f64,
    t: f64,
    out: *mut SqzMoments,
) -> SqzStatus {
    guard(|| {
        if out.is_null() {
            return Err(fail(SqzStatus::SQZ_NULL_POINTER, "out is null"));
        }
        let m = lift(kanai_moments(gamma, Complex64::new(alpha_re, alpha_im), t))?;
        let v = SqzMoments {
            t: m.t,
            mean_q: m.mean_q,
            mean_p: m.mean_p,
            sigma_q: m.sigma_q,
            sigma_p: m.sigma_p,
            sigma_pq: m.sigma_pq,
        };
        // SAFETY: `out` is non-null.
        unsafe { *out = v };
        Ok(())
    })
}
