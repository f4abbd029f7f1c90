//! C ABI over the `shielding` engine.
//!
//! Every fallible function returns an `int32_t` status: `SHIELDING_OK` on
//! success, a positive library error code, or one of the negative ABI codes
//! below. The message for the most recent failure on the calling thread is
//! available from [`shielding_last_error`].
//!
//! Handles are opaque and owned by the caller once returned; release them
//! with the matching `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use shielding::engine::{
    evaluate_field, evaluate_psi, evaluate_y, one_soliton_closed_form, soliton_params_from_constant,
};
use shielding::sampling::{fekete_points, ginibre_sample, GinibreConfig};
use shielding::special::complete_elliptic_k;
use shielding::types::{EvaluationPoint, Grid, ScatteringData, C64};
use shielding::Error;

pub const SHIELDING_OK: i32 = 0;
/// A required pointer argument was null.
pub const SHIELDING_ERR_NULL_POINTER: i32 = -1;
/// A Rust panic was caught at the boundary.
pub const SHIELDING_ERR_PANIC: i32 = -2;
/// An output buffer is too short.
pub const SHIELDING_ERR_BUFFER_TOO_SMALL: i32 = -3;
/// An index is out of range.
pub const SHIELDING_ERR_OUT_OF_RANGE: i32 = -4;

/// Complex number with the memory layout of C99 `double _Complex`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ShieldingComplex {
    pub re: f64,
    pub im: f64,
}

impl From<C64> for ShieldingComplex {
    fn from(z: C64) -> Self {
        Self { re: z.re, im: z.im }
    }
}

impl From<ShieldingComplex> for C64 {
    fn from(z: ShieldingComplex) -> Self {
        C64::new(z.re, z.im)
    }
}

/// Discrete scattering data: poles in the upper half-plane with their norming constants.
pub struct ShieldingSpectrum(ScatteringData);

/// A list of points in the complex plane.
pub struct ShieldingPoints(Vec<C64>);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn clear_last_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

enum Failure {
    Lib(Error),
    Abi(i32, String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

fn null(name: &str) -> Failure {
    Failure::Abi(SHIELDING_ERR_NULL_POINTER, format!("`{name}` is null"))
}

/// Runs `f`, translating errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> i32 {
    clear_last_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SHIELDING_OK,
        Ok(Err(Failure::Lib(e))) => {
            set_last_error(e.to_string());
            e.code()
        }
        Ok(Err(Failure::Abi(code, msg))) => {
            set_last_error(msg);
            code
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(format!("panic: {msg}"));
            SHIELDING_ERR_PANIC
        }
    }
}

unsafe fn slice<'a, T>(p: *const T, len: usize, name: &str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(name));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn write<T>(out: *mut T, value: T, name: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null(name));
    }
    out.write(value);
    Ok(())
}

/// Message describing the last failure on this thread, or null if the last
/// call succeeded. Valid until the next library call on the same thread.
#[no_mangle]
pub extern "C" fn shielding_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn shielding_version() -> *const c_char {
    static VERSION: &CStr = match CStr::from_bytes_with_nul(concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes()) {
        Ok(s) => s,
        Err(_) => panic!("version string"),
    };
    VERSION.as_ptr()
}

/// Builds scattering data from `len` poles `z` and norming constants `c`.
///
/// # Safety
/// `z` and `c` must point to `len` readable elements; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn shielding_spectrum_new(
    z: *const ShieldingComplex,
    c: *const ShieldingComplex,
    len: usize,
    out: *mut *mut ShieldingSpectrum,
) -> i32 {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let z: Vec<C64> = slice(z, len, "z")?.iter().map(|&p| p.into()).collect();
        let c: Vec<C64> = slice(c, len, "c")?.iter().map(|&p| p.into()).collect();
        let data = ScatteringData::from_pairs(&z, &c)?;
        write(out, Box::into_raw(Box::new(ShieldingSpectrum(data))), "out")
    })
}

/// # Safety
/// `spectrum` must be null or a handle from [`shielding_spectrum_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn shielding_spectrum_free(spectrum: *mut ShieldingSpectrum) {
    if !spectrum.is_null() {
        drop(Box::from_raw(spectrum));
    }
}

/// Number of poles, or 0 for a null handle.
///
/// # Safety
/// `spectrum` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn shielding_spectrum_len(spectrum: *const ShieldingSpectrum) -> usize {
    spectrum.as_ref().map_or(0, |s| s.0.len())
}

/// `psi(x, t)`. `out_condition` may be null; otherwise it receives the
/// condition estimate of the linear solve.
///
/// # Safety
/// `spectrum` must be a live handle; `out_psi` must be writable.
#[no_mangle]
pub unsafe extern "C" fn shielding_evaluate_psi(
    spectrum: *const ShieldingSpectrum,
    x: f64,
    t: f64,
    out_psi: *mut ShieldingComplex,
    out_condition: *mut f64,
) -> i32 {
    guard(|| {
        let s = spectrum.as_ref().ok_or_else(|| null("spectrum"))?;
        if out_psi.is_null() {
            return Err(null("out_psi"));
        }
        let (psi, diag) = evaluate_psi(&s.0, EvaluationPoint::new(x, t))?;
        out_psi.write(psi.into());
        if !out_condition.is_null() {
            out_condition.write(diag.condition_estimate);
        }
        Ok(())
    })
}

/// `psi` on a uniform `nx` by `nt` grid, written row-major with `t` outer.
/// `out` must hold at least `nx * nt` values (`out_len`).
///
/// # Safety
/// `spectrum` must be a live handle; `out` must point to `out_len` writable elements.
#[no_mangle]
pub unsafe extern "C" fn shielding_evaluate_field(
    spectrum: *const ShieldingSpectrum,
    x_min: f64,
    x_max: f64,
    nx: usize,
    t_min: f64,
    t_max: f64,
    nt: usize,
    out: *mut ShieldingComplex,
    out_len: usize,
) -> i32 {
    guard(|| {
        let s = spectrum.as_ref().ok_or_else(|| null("spectrum"))?;
        let needed = nx.saturating_mul(nt);
        if out_len < needed {
            return Err(Failure::Abi(
                SHIELDING_ERR_BUFFER_TOO_SMALL,
                format!("output holds {out_len} values, grid needs {needed}"),
            ));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let grid = Grid::uniform(x_min, x_max, nx, t_min, t_max, nt)?;
        let field = evaluate_field(&s.0, &grid)?;
        let dst = std::slice::from_raw_parts_mut(out, needed);
        for (d, v) in dst.iter_mut().zip(field.psi.iter().flatten()) {
            *d = (*v).into();
        }
        Ok(())
    })
}

/// The 2 x 2 matrix `Y(z; x, t)`, written row-major into `out[4]`.
///
/// # Safety
/// `spectrum` must be a live handle; `out` must point to 4 writable elements.
#[no_mangle]
pub unsafe extern "C" fn shielding_evaluate_y(
    spectrum: *const ShieldingSpectrum,
    x: f64,
    t: f64,
    z: ShieldingComplex,
    out: *mut ShieldingComplex,
) -> i32 {
    guard(|| {
        let s = spectrum.as_ref().ok_or_else(|| null("spectrum"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let y = evaluate_y(&s.0, EvaluationPoint::new(x, t), z.into())?;
        let dst = std::slice::from_raw_parts_mut(out, 4);
        for (d, v) in dst.iter_mut().zip(y.entries.iter().flatten()) {
            *d = (*v).into();
        }
        Ok(())
    })
}

/// Closed-form one-soliton with pole `z0` and norming constant `c0`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn shielding_one_soliton(
    z0: ShieldingComplex,
    c0: ShieldingComplex,
    x: f64,
    t: f64,
    out: *mut ShieldingComplex,
) -> i32 {
    guard(|| {
        let params = soliton_params_from_constant(z0.into(), c0.into())?;
        write(out, one_soliton_closed_form(params, EvaluationPoint::new(x, t)).into(), "out")
    })
}

/// Fekete points for the weight `|w|^2` (raw scale). Fails with the
/// max-iterations code if the descent does not reach `tol`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn shielding_fekete_points(
    n: usize,
    tol: f64,
    max_iter: usize,
    seed: u64,
    out: *mut *mut ShieldingPoints,
) -> i32 {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let result = fekete_points(n, tol, max_iter, seed)?.ensure_converged()?;
        write(out, Box::into_raw(Box::new(ShieldingPoints(result.points))), "out")
    })
}

/// One Ginibre configuration of `n` points from a Metropolis chain with the
/// default schedule.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn shielding_ginibre_sample(n: usize, seed: u64, out: *mut *mut ShieldingPoints) -> i32 {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let points = ginibre_sample(n, GinibreConfig::default(), seed)?;
        write(out, Box::into_raw(Box::new(ShieldingPoints(points))), "out")
    })
}

/// Number of points, or 0 for a null handle.
///
/// # Safety
/// `points` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn shielding_points_len(points: *const ShieldingPoints) -> usize {
    points.as_ref().map_or(0, |p| p.0.len())
}

/// # Safety
/// `points` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn shielding_points_get(
    points: *const ShieldingPoints,
    index: usize,
    out: *mut ShieldingComplex,
) -> i32 {
    guard(|| {
        let p = points.as_ref().ok_or_else(|| null("points"))?;
        let v = p.0.get(index).ok_or_else(|| {
            Failure::Abi(SHIELDING_ERR_OUT_OF_RANGE, format!("index {index} out of range for {} points", p.0.len()))
        })?;
        write(out, (*v).into(), "out")
    })
}

/// Copies all points into `out`, which must hold at least `out_len >= len` values.
///
/// # Safety
/// `points` must be a live handle; `out` must point to `out_len` writable elements.
#[no_mangle]
pub unsafe extern "C" fn shielding_points_copy(
    points: *const ShieldingPoints,
    out: *mut ShieldingComplex,
    out_len: usize,
) -> i32 {
    guard(|| {
        let p = points.as_ref().ok_or_else(|| null("points"))?;
        if out_len < p.0.len() {
            return Err(Failure::Abi(
                SHIELDING_ERR_BUFFER_TOO_SMALL,
                format!("output holds {out_len} values, need {}", p.0.len()),
            ));
        }
        if p.0.is_empty() {
            return Ok(());
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let dst = std::slice::from_raw_parts_mut(out, p.0.len());
        for (d, v) in dst.iter_mut().zip(&p.0) {
            *d = (*v).into();
        }
        Ok(())
    })
}

/// # Safety
/// `points` must be null or a live handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn shielding_points_free(points: *mut ShieldingPoints) {
    if !points.is_null() {
        drop(Box::from_raw(points));
    }
}

/// Complete elliptic integral of the first kind `K(m)`, parameter convention.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn shielding_elliptic_k(m: f64, out: *mut f64) -> i32 {
    guard(|| write(out, complete_elliptic_k(m)?, "out"))
}
