//! C interface to `etherphase`.
//!
//! Every function returns an [`EpStatus`]; results travel through out
//! pointers. On failure [`ep_last_error_message`] describes the error of the
//! most recent call on the calling thread. Structures are opaque handles
//! created by [`ep_structure_new`] or [`ep_structure_from_config`] and released
//! with [`ep_structure_free`]. Strings returned by the library are released
//! with [`ep_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use etherphase::config::RunConfig;
use etherphase::ether::{EtherStructure, FixtureSpec};
use etherphase::geometry::{point, NumericSettings, Point};
use etherphase::groupoid::{chord_phase, LagrangianCurve};
use etherphase::phase_maps::{dynamic_phase, HamiltonianSystem};
use etherphase::phase_product::triangle_phase;
use etherphase::verify::verify_structure;
use etherphase::EtherError;

/// Result of every call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EpStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Domain = 3,
    NoConvergence = 4,
    Singular = 5,
    Ambiguous = 6,
    NotInDomain = 7,
    Numeric = 8,
    Dimension = 9,
    Panic = 10,
}

/// Opaque Ether structure.
pub struct EpStructure {
    inner: EtherStructure,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(err: &EtherError) -> EpStatus {
    match err {
        EtherError::Domain { .. } => EpStatus::Domain,
        EtherError::Numeric { .. } => EpStatus::Numeric,
        EtherError::NoConvergence { .. } => EpStatus::NoConvergence,
        EtherError::Singular { .. } => EpStatus::Singular,
        EtherError::Ambiguous { .. } => EpStatus::Ambiguous,
        EtherError::NotInDomain { .. } => EpStatus::NotInDomain,
        EtherError::Parameter(_) => EpStatus::InvalidArgument,
        EtherError::Dimension { .. } => EpStatus::Dimension,
    }
}

struct Fail(EpStatus, String);

impl From<EtherError> for Fail {
    fn from(e: EtherError) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(EpStatus::NullPointer, format!("{what} is null"))
}

/// Runs `f`, converting errors and panics into a status.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> EpStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            EpStatus::Ok
        }
        Ok(Err(Fail(status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            EpStatus::Panic
        }
    }
}

unsafe fn text<'a>(s: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if s.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(s).to_str().map_err(|_| Fail(EpStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

unsafe fn structure<'a>(s: *const EpStructure) -> Result<&'a EtherStructure, Fail> {
    s.as_ref().map(|s| &s.inner).ok_or_else(|| null("structure"))
}

/// Reads a point of the structure's dimension.
unsafe fn read_point(e: &EtherStructure, v: *const f64, len: usize, what: &str) -> Result<Point, Fail> {
    if v.is_null() {
        return Err(null(what));
    }
    if len != e.dim() {
        return Err(Fail(EpStatus::Dimension, format!("{what}: length {len}, structure dimension {}", e.dim())));
    }
    Ok(Point::from_column_slice(std::slice::from_raw_parts(v, len)))
}

unsafe fn write_point(p: &Point, out: *mut f64) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null("out"));
    }
    ptr::copy_nonoverlapping(p.as_ptr(), out, p.len());
    Ok(())
}

unsafe fn write<T>(v: T, out: *mut T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null("out"));
    }
    out.write(v);
    Ok(())
}

fn boxed(e: EtherStructure) -> *mut EpStructure {
    Box::into_raw(Box::new(EpStructure { inner: e }))
}

/// Message of the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn ep_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ep_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Builds a fixture by name with default parameters.
///
/// # Safety
/// `name` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ep_structure_new(name: *const c_char, out: *mut *mut EpStructure) -> EpStatus {
    guard(|| {
        let name = text(name, "name")?;
        let e = FixtureSpec::named(name).build(NumericSettings::default())?;
        write(boxed(e), out)
    })
}

/// Builds the fixture of a JSON run configuration (tolerances and fault
/// injection applied).
///
/// # Safety
/// `config_json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ep_structure_from_config(config_json: *const c_char, out: *mut *mut EpStructure) -> EpStatus {
    guard(|| {
        let cfg = RunConfig::from_json(text(config_json, "config_json")?)?;
        write(boxed(cfg.build_fixture()?), out)
    })
}

/// # Safety
/// `s` must come from this library and not be used afterwards; null is ignored.
#[no_mangle]
pub unsafe extern "C" fn ep_structure_free(s: *mut EpStructure) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Chart dimension `2n`.
///
/// # Safety
/// `s` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ep_structure_dim(s: *const EpStructure, out: *mut usize) -> EpStatus {
    guard(|| write(structure(s)?.dim(), out))
}

/// # Safety
/// `s` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ep_structure_involutive(s: *const EpStructure, out: *mut bool) -> EpStatus {
    guard(|| write(structure(s)?.involutive(), out))
}

/// `H_x(z)` into `out[0..len]`.
///
/// # Safety
/// `x`, `z` and `out` must hold `len` doubles, `len` being the dimension.
#[no_mangle]
pub unsafe extern "C" fn ep_hamiltonian(
    s: *const EpStructure,
    x: *const f64,
    z: *const f64,
    len: usize,
    out: *mut f64,
) -> EpStatus {
    guard(|| {
        let e = structure(s)?;
        let (x, z) = (read_point(e, x, len, "x")?, read_point(e, z, len, "z")?);
        write_point(&e.hamiltonian(&x, &z)?, out)
    })
}

/// `s_x(z)` into `out[0..len]`.
///
/// # Safety
/// `x`, `z` and `out` must hold `len` doubles, `len` being the dimension.
#[no_mangle]
pub unsafe extern "C" fn ep_reflection(
    s: *const EpStructure,
    x: *const f64,
    z: *const f64,
    len: usize,
    out: *mut f64,
) -> EpStatus {
    guard(|| {
        let e = structure(s)?;
        let (x, z) = (read_point(e, x, len, "x")?, read_point(e, z, len, "z")?);
        write_point(&e.reflection(&x, &z)?, out)
    })
}

/// Ether mid-point of `a` and `b` into `out[0..len]`.
///
/// # Safety
/// `a`, `b` and `out` must hold `len` doubles, `len` being the dimension.
#[no_mangle]
pub unsafe extern "C" fn ep_midpoint(s: *const EpStructure, a: *const f64, b: *const f64, len: usize, out: *mut f64) -> EpStatus {
    guard(|| {
        let e = structure(s)?;
        let (a, b) = (read_point(e, a, len, "a")?, read_point(e, b, len, "b")?);
        write_point(&e.midpoint(&a, &b)?, out)
    })
}

/// Triangle phase with mid-points `x`, `y`, `z`.
///
/// # Safety
/// `x`, `y`, `z` must hold `len` doubles and `out` be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ep_triangle_phase(
    s: *const EpStructure,
    x: *const f64,
    y: *const f64,
    z: *const f64,
    len: usize,
    out: *mut f64,
) -> EpStatus {
    guard(|| {
        let e = structure(s)?;
        let (x, y, z) = (read_point(e, x, len, "x")?, read_point(e, y, len, "y")?, read_point(e, z, len, "z")?);
        write(triangle_phase(e, &x, &y, &z)?, out)
    })
}

/// Dynamic phase of the harmonic oscillator `|z|²/2` at time `t`.
///
/// # Safety
/// `x` must hold `len` doubles and `out` be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ep_oscillator_phase(
    s: *const EpStructure,
    x: *const f64,
    len: usize,
    t: f64,
    out: *mut f64,
) -> EpStatus {
    guard(|| {
        let e = structure(s)?;
        let x = read_point(e, x, len, "x")?;
        write(dynamic_phase(e, &HamiltonianSystem::harmonic_oscillator(), &x, t)?, out)
    })
}

/// Chord phase of the circle with centre `(cq, cp)` and radius `r` at `x[0..2]`.
///
/// # Safety
/// `x` must hold 2 doubles and `out` be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ep_circle_chord_phase(
    s: *const EpStructure,
    cq: f64,
    cp: f64,
    r: f64,
    x: *const f64,
    out: *mut f64,
) -> EpStatus {
    guard(|| {
        let e = structure(s)?;
        if !(r.is_finite() && r > 0.0) {
            return Err(Fail(EpStatus::InvalidArgument, "radius must be positive".into()));
        }
        let x = read_point(e, x, 2, "x")?;
        write(chord_phase(e, &LagrangianCurve::circle(point(&[cq, cp]), r), &x)?, out)
    })
}

/// Runs the verification suite of a JSON run configuration and returns the
/// report as a JSON string in `out_json` and its exit code (0 or 1) in
/// `out_exit`. Configuration errors return a status instead.
///
/// # Safety
/// `config_json` must be NUL-terminated; `out_json` and `out_exit` valid pointers.
/// The string must be released with [`ep_string_free`].
#[no_mangle]
pub unsafe extern "C" fn ep_verify(config_json: *const c_char, out_json: *mut *mut c_char, out_exit: *mut i32) -> EpStatus {
    guard(|| {
        if out_json.is_null() || out_exit.is_null() {
            return Err(null("out"));
        }
        let cfg = RunConfig::from_json(text(config_json, "config_json")?)?;
        let e = cfg.build_fixture()?;
        let report = verify_structure(&e, &cfg);
        let json = serde_json::to_string(&report).map_err(|err| Fail(EpStatus::Numeric, err.to_string()))?;
        let c = CString::new(json).map_err(|err| Fail(EpStatus::Numeric, err.to_string()))?;
        write(report.exit_code(), out_exit)?;
        write(c.into_raw(), out_json)
    })
}

/// # Safety
/// `s` must be a string returned by this library, or null.
#[no_mangle]
pub unsafe extern "C" fn ep_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
