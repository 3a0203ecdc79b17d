//! C ABI over the core toolkit.
//!
//! Objects cross the boundary as opaque handles created by `vm_*_new` style
//! constructors and released with the matching `vm_*_free`. Every fallible
//! call returns a [`VmStatus`]; on failure the message is available from
//! [`vm_last_error`] on the same thread. Out-pointers are written only on
//! success.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use varmorrey::harness::{Command, Format, RunOptions, StudyConfig};
use varmorrey::operators;
use varmorrey::weights::{self, BallFamily};
use varmorrey::{Error, ExponentField, Grid, Point, ScalarField};

/// Result codes. `VM_OK` is zero; library errors keep their kind.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VmStatus {
    VmOk = 0,
    VmArgument = 1,
    VmDomain = 2,
    VmNumeric = 3,
    VmConvergence = 4,
    VmPrecondition = 5,
    VmInvariant = 6,
    VmConfig = 7,
    /// A study ran but one of its assertions failed; its report is still
    /// returned.
    VmAssertion = 8,
    VmNullPointer = 9,
    VmInvalidUtf8 = 10,
    VmPanic = 11,
}

impl From<&Error> for VmStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::Argument(_) => VmStatus::VmArgument,
            Error::Domain(_) => VmStatus::VmDomain,
            Error::Numeric(_) => VmStatus::VmNumeric,
            Error::Convergence(_) => VmStatus::VmConvergence,
            Error::Precondition(_) => VmStatus::VmPrecondition,
            Error::Invariant(_) => VmStatus::VmInvariant,
            Error::Config(_) => VmStatus::VmConfig,
            Error::Assertion(_) => VmStatus::VmAssertion,
        }
    }
}

/// Uniform grid on a box, optionally masked.
pub struct VmGrid(Grid);

/// Real field sampled on a grid.
pub struct VmField(ScalarField);

/// Variable exponent sampled on a grid.
pub struct VmExponent(ExponentField);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

enum Failure {
    Lib(Error),
    Null(&'static str),
    Utf8(&'static str),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

type FfiResult<T> = Result<T, Failure>;

/// Runs `body`, records any error or panic and maps it to a status.
fn guard(body: impl FnOnce() -> FfiResult<()>) -> VmStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => VmStatus::VmOk,
        Ok(Err(Failure::Lib(e))) => {
            set_error(e.to_string());
            VmStatus::from(&e)
        }
        Ok(Err(Failure::Null(what))) => {
            set_error(format!("null pointer: {what}"));
            VmStatus::VmNullPointer
        }
        Ok(Err(Failure::Utf8(what))) => {
            set_error(format!("{what} is not valid UTF-8"));
            VmStatus::VmInvalidUtf8
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            VmStatus::VmPanic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &'static str) -> FfiResult<&'a T> {
    p.as_ref().ok_or(Failure::Null(what))
}

unsafe fn array<'a>(p: *const f64, len: usize, what: &'static str) -> FfiResult<&'a [f64]> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Failure::Null(what));
    }
    Ok(slice::from_raw_parts(p, len))
}

unsafe fn text<'a>(p: *const c_char, what: &'static str) -> FfiResult<&'a str> {
    if p.is_null() {
        return Err(Failure::Null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Failure::Utf8(what))
}

unsafe fn store<T>(out: *mut *mut T, value: T, what: &'static str) -> FfiResult<()> {
    if out.is_null() {
        return Err(Failure::Null(what));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

unsafe fn put<T>(out: *mut T, value: T, what: &'static str) -> FfiResult<()> {
    if out.is_null() {
        return Err(Failure::Null(what));
    }
    *out = value;
    Ok(())
}

unsafe fn free<T>(p: *mut T) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Flat `[x0, y0, x1, y1, …]` (2-D) or `[x0, x1, …]` (1-D) into points.
fn points(grid: &Grid, coords: &[f64]) -> FfiResult<Vec<Point>> {
    let d = grid.dim();
    if coords.is_empty() || coords.len() % d != 0 {
        return Err(Error::Argument(format!(
            "{} coordinates do not form {d}-D points",
            coords.len()
        ))
        .into());
    }
    Ok(coords
        .chunks(d)
        .map(Point::from_slice)
        .collect::<Result<_, _>>()?)
}

/// Message of the last failed call on this thread, or null. The pointer is
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn vm_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Grid with spacing `h` on `[lo_i, hi_i]`, `extent = [lo_0, hi_0, lo_1, hi_1]`
/// for `dim` axes (1 or 2).
///
/// # Safety
/// `extent` must point to `2 * dim` doubles and `out` to writable storage.
#[no_mangle]
pub unsafe extern "C" fn vm_grid_new(
    h: f64,
    extent: *const f64,
    dim: usize,
    out: *mut *mut VmGrid,
) -> VmStatus {
    guard(|| {
        let e = array(extent, 2 * dim, "extent")?;
        let axes: Vec<(f64, f64)> = e.chunks(2).map(|a| (a[0], a[1])).collect();
        store(out, VmGrid(Grid::new(h, &axes)?), "out")
    })
}

/// # Safety
/// `grid` must come from [`vm_grid_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn vm_grid_free(grid: *mut VmGrid) {
    free(grid)
}

/// Number of cells (members or not), or 0 for a null handle.
///
/// # Safety
/// `grid` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn vm_grid_len(grid: *const VmGrid) -> usize {
    grid.as_ref().map_or(0, |g| g.0.len())
}

/// Center of `cell` into `out_xy` (one or two doubles, by dimension).
///
/// # Safety
/// `grid` must be a live handle and `out_xy` must hold `dim` doubles.
#[no_mangle]
pub unsafe extern "C" fn vm_grid_center(
    grid: *const VmGrid,
    cell: usize,
    out_xy: *mut f64,
) -> VmStatus {
    guard(|| {
        let g = &deref(grid, "grid")?.0;
        if cell >= g.len() {
            return Err(Error::Argument(format!("cell {cell} out of range {}", g.len())).into());
        }
        if out_xy.is_null() {
            return Err(Failure::Null("out_xy"));
        }
        let c = g.center(cell);
        slice::from_raw_parts_mut(out_xy, g.dim()).copy_from_slice(&c.0[..g.dim()]);
        Ok(())
    })
}

/// Field from `len == vm_grid_len(grid)` samples in cell order.
///
/// # Safety
/// `values` must point to `len` doubles; `grid` must be live.
#[no_mangle]
pub unsafe extern "C" fn vm_field_new(
    grid: *const VmGrid,
    values: *const f64,
    len: usize,
    out: *mut *mut VmField,
) -> VmStatus {
    guard(|| {
        let g = &deref(grid, "grid")?.0;
        let v = array(values, len, "values")?;
        store(
            out,
            VmField(ScalarField::from_values(g, v.to_vec())?),
            "out",
        )
    })
}

/// Copies the samples into `buf`, which must hold `len` doubles.
///
/// # Safety
/// `field` must be live and `buf` writable for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn vm_field_values(
    field: *const VmField,
    buf: *mut f64,
    len: usize,
) -> VmStatus {
    guard(|| {
        let f = &deref(field, "field")?.0;
        if len != f.len() {
            return Err(Error::Argument(format!(
                "buffer holds {len} values, field has {}",
                f.len()
            ))
            .into());
        }
        if buf.is_null() {
            return Err(Failure::Null("buf"));
        }
        slice::from_raw_parts_mut(buf, len).copy_from_slice(f.values());
        Ok(())
    })
}

/// # Safety
/// `field` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn vm_field_free(field: *mut VmField) {
    free(field)
}

/// Exponent from samples in cell order, with its value at infinity.
///
/// # Safety
/// `values` must point to `len` doubles; `grid` must be live.
#[no_mangle]
pub unsafe extern "C" fn vm_exponent_new(
    grid: *const VmGrid,
    values: *const f64,
    len: usize,
    p_infinity: f64,
    out: *mut *mut VmExponent,
) -> VmStatus {
    guard(|| {
        let g = &deref(grid, "grid")?.0;
        let v = array(values, len, "values")?;
        store(
            out,
            VmExponent(ExponentField::from_values(g, v.to_vec(), p_infinity)?),
            "out",
        )
    })
}

/// Constant exponent `p0`.
///
/// # Safety
/// `grid` must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn vm_exponent_constant(
    grid: *const VmGrid,
    p0: f64,
    out: *mut *mut VmExponent,
) -> VmStatus {
    guard(|| {
        let g = &deref(grid, "grid")?.0;
        store(out, VmExponent(ExponentField::constant(g, p0)?), "out")
    })
}

/// # Safety
/// `p` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn vm_exponent_free(p: *mut VmExponent) {
    free(p)
}

/// Luxemburg norm of `f·weight` over the whole grid; `weight` may be null.
///
/// # Safety
/// All non-null handles must be live and built on `grid`.
#[no_mangle]
pub unsafe extern "C" fn vm_norm(
    f: *const VmField,
    p: *const VmExponent,
    grid: *const VmGrid,
    weight: *const VmField,
    out: *mut f64,
) -> VmStatus {
    guard(|| {
        let g = &deref(grid, "grid")?.0;
        let w = weight.as_ref().map(|w| &w.0);
        let v = varmorrey::lebesgue::norm_value(&deref(f, "f")?.0, &deref(p, "p")?.0, g, w)?;
        put(out, v, "out")
    })
}

/// Riesz potential `I^α f` as a new field.
///
/// # Safety
/// Handles must be live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn vm_riesz(
    f: *const VmField,
    alpha: f64,
    grid: *const VmGrid,
    out: *mut *mut VmField,
) -> VmStatus {
    guard(|| {
        let g = &deref(grid, "grid")?.0;
        let r = operators::riesz_potential(&deref(f, "f")?.0, alpha, g)?;
        store(out, VmField(r.values), "out")
    })
}

/// Fractional maximal function `M^α f` over the given radii (`α = 0` for
/// the Hardy-Littlewood maximal function).
///
/// # Safety
/// `radii` must point to `n_radii` doubles; handles live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn vm_maximal(
    f: *const VmField,
    alpha: f64,
    grid: *const VmGrid,
    radii: *const f64,
    n_radii: usize,
    out: *mut *mut VmField,
) -> VmStatus {
    guard(|| {
        let g = &deref(grid, "grid")?.0;
        let radii = array(radii, n_radii, "radii")?;
        let first = *g
            .members()
            .first()
            .ok_or_else(|| Error::Argument("grid has no member cells".into()))?;
        let balls = BallFamily::new(g, vec![g.center(first)], radii.to_vec())?;
        let r = operators::frac_maximal(&deref(f, "f")?.0, alpha, g, &balls)?;
        store(out, VmField(r.values), "out")
    })
}

/// Weight constant `[ω]_{A_{p,q}}` over centers × radii. `centers` is flat
/// with `grid` dimension coordinates per point.
///
/// # Safety
/// Arrays must hold the stated counts; handles live; `out` writable.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn vm_apq(
    omega: *const VmField,
    p: *const VmExponent,
    q: *const VmExponent,
    grid: *const VmGrid,
    centers: *const f64,
    n_coords: usize,
    radii: *const f64,
    n_radii: usize,
    out: *mut f64,
) -> VmStatus {
    guard(|| {
        let g = &deref(grid, "grid")?.0;
        let centers = points(g, array(centers, n_coords, "centers")?)?;
        let balls = BallFamily::new(g, centers, array(radii, n_radii, "radii")?.to_vec())?;
        let report = weights::apq_constant(
            &deref(omega, "omega")?.0,
            &deref(p, "p")?.0,
            &deref(q, "q")?.0,
            g,
            &balls,
        )?;
        put(out, report.constant, "out")
    })
}

/// Runs a harness command (`"norm"`, `"study-bounded"`, …) on a TOML config
/// and returns the JSON report in `*out`, to be released with
/// [`vm_string_free`]. A failed study assertion returns `VmAssertion` with
/// the report still written.
///
/// # Safety
/// `command` and `config_toml` must be NUL-terminated; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn vm_run_study(
    command: *const c_char,
    config_toml: *const c_char,
    out: *mut *mut c_char,
) -> VmStatus {
    let mut failed = None;
    let status = guard(|| {
        let cmd: Command = text(command, "command")?.parse()?;
        let cfg = StudyConfig::from_toml(text(config_toml, "config_toml")?)?;
        let report = cmd.run(&cfg, RunOptions::default())?;
        let json = report.render(Format::Json)?;
        let c = CString::new(json).map_err(|e| Error::Numeric(e.to_string()))?;
        put(out, c.into_raw(), "out")?;
        if !report.failures.is_empty() {
            failed = Some(report.failures.join("; "));
        }
        Ok(())
    });
    match failed {
        Some(msg) if status == VmStatus::VmOk => {
            set_error(Error::Assertion(msg).to_string());
            VmStatus::VmAssertion
        }
        _ => status,
    }
}

/// # Safety
/// `s` must come from [`vm_run_study`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn vm_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
