//! C ABI over the fredres library.
//!
//! Handles are opaque and owned by the caller once returned; release them with the matching
//! `*_free` function. Every entry point returns a `FredresStatus`; on failure the message is kept
//! per thread and can be copied out with `fredres_last_error_message`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use fredres::config::{CoefficientSpec, JobConfig, Preset};
use fredres::fredholm::{determinant, Method};
use fredres::resolvent::Branch;
use fredres::resonances::{find_resonances, Region, ResonanceSet};
use fredres::scattering::smatrix_plus;
use fredres::{Coefficients, Complex64, Error};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FredresStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    PoleProximity = 3,
    Singular = 4,
    NearZero = 5,
    Numerical = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FredresPreset {
    Zero = 0,
    /// p = 0, q = 1 on [0, 1]
    Box = 1,
    /// p = x(1 - x), q = sin(πx) on [0, 1]
    Smooth = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FredresBranch {
    Plus = 0,
    Minus = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FredresComplex {
    pub re: f64,
    pub im: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FredresResonance {
    pub re: f64,
    pub im: f64,
    pub multiplicity: u32,
    pub residual: f64,
    pub certificate_radius: f64,
}

/// Coefficient pair (p, q).
pub struct FredresCoefficients {
    inner: Coefficients,
}

/// Located zeros of D₊ in an annulus.
pub struct FredresResonanceSet {
    inner: ResonanceSet,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(e: &Error) -> FredresStatus {
    match e {
        Error::PoleProximity { .. } => FredresStatus::PoleProximity,
        Error::Singular { .. } => FredresStatus::Singular,
        Error::NearZero { .. } => FredresStatus::NearZero,
        Error::InvalidCoefficients(_) | Error::Domain(_) | Error::Config(_) => FredresStatus::InvalidArgument,
        _ => FredresStatus::Numerical,
    }
}

/// Runs `f`, recording errors and panics.
fn guard<F: FnOnce() -> Result<(), (FredresStatus, String)>>(f: F) -> FredresStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => FredresStatus::Ok,
        Ok(Err((s, msg))) => {
            set_error(msg);
            s
        }
        Err(_) => {
            set_error("internal panic".into());
            FredresStatus::Panic
        }
    }
}

fn lib<T>(r: fredres::Result<T>) -> Result<T, (FredresStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(what: &str) -> (FredresStatus, String) {
    (FredresStatus::NullPointer, format!("{what} is null"))
}

fn branch_of(b: FredresBranch) -> Branch {
    match b {
        FredresBranch::Plus => Branch::Plus,
        FredresBranch::Minus => Branch::Minus,
    }
}

fn method_of(nodes: usize) -> Method {
    if nodes == 0 {
        Method::Ode { steps_per_unit: None }
    } else {
        Method::Nystrom { n: nodes }
    }
}

/// Copies the last error message of this thread into `buf` (NUL-terminated, truncated to `len`).
/// Returns the full message length in bytes, excluding the terminator.
///
/// # Safety
/// `buf` must be null or point to at least `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn fredres_last_error_message(buf: *mut c_char, len: usize) -> usize {
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

/// # Safety
/// `out` must be a valid pointer to a handle slot.
#[no_mangle]
pub unsafe extern "C" fn fredres_coefficients_preset(preset: FredresPreset, out: *mut *mut FredresCoefficients) -> FredresStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let p = match preset {
            FredresPreset::Zero => Preset::Zero,
            FredresPreset::Box => Preset::Box,
            FredresPreset::Smooth => Preset::Smooth,
        };
        let spec = CoefficientSpec { preset: Some(p), gamma: None, segments: vec![] };
        let inner = lib(spec.build())?;
        *out = Box::into_raw(Box::new(FredresCoefficients { inner }));
        Ok(())
    })
}

/// Builds coefficients from the `[coefficients]` table of a TOML job configuration.
///
/// # Safety
/// `toml` must be a NUL-terminated string; `out` a valid pointer to a handle slot.
#[no_mangle]
pub unsafe extern "C" fn fredres_coefficients_from_toml(toml: *const c_char, out: *mut *mut FredresCoefficients) -> FredresStatus {
    guard(|| {
        if toml.is_null() {
            return Err(null("toml"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let text = CStr::from_ptr(toml).to_str().map_err(|e| (FredresStatus::InvalidArgument, format!("toml is not UTF-8: {e}")))?;
        let cfg = lib(JobConfig::from_toml(text))?;
        let inner = lib(cfg.coefficients.build())?;
        *out = Box::into_raw(Box::new(FredresCoefficients { inner }));
        Ok(())
    })
}

/// # Safety
/// `c` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn fredres_coefficients_free(c: *mut FredresCoefficients) {
    if !c.is_null() {
        drop(Box::from_raw(c));
    }
}

/// D±(k). `nodes` = 0 selects the ODE route, otherwise a Nyström matrix with that many nodes.
///
/// # Safety
/// `c` must be a live handle; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fredres_determinant(
    c: *const FredresCoefficients,
    k: FredresComplex,
    branch: FredresBranch,
    nodes: usize,
    out: *mut FredresComplex,
) -> FredresStatus {
    guard(|| {
        let c = c.as_ref().ok_or_else(|| null("coefficients"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let d = lib(determinant(&c.inner, Complex64::new(k.re, k.im), branch_of(branch), method_of(nodes)))?;
        *out = FredresComplex { re: d.re, im: d.im };
        Ok(())
    })
}

/// S₊(k) from the amplitudes and from the determinant ratio D₋/D₊.
///
/// # Safety
/// `c` must be a live handle; `s` and `s_det` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn fredres_smatrix_plus(
    c: *const FredresCoefficients,
    k: FredresComplex,
    nodes: usize,
    s: *mut FredresComplex,
    s_det: *mut FredresComplex,
) -> FredresStatus {
    guard(|| {
        let c = c.as_ref().ok_or_else(|| null("coefficients"))?;
        if s.is_null() || s_det.is_null() {
            return Err(null("output"));
        }
        if nodes < 8 {
            return Err((FredresStatus::InvalidArgument, format!("nodes must be at least 8, got {nodes}")));
        }
        let v = lib(smatrix_plus(&c.inner, Complex64::new(k.re, k.im), nodes))?;
        *s = FredresComplex { re: v.s.re, im: v.s.im };
        *s_det = FredresComplex { re: v.s_det.re, im: v.s_det.im };
        Ok(())
    })
}

/// Zeros of D₊ in r_min ≤ |k| ≤ r_max (ODE route).
///
/// # Safety
/// `c` must be a live handle; `out` a valid pointer to a handle slot.
#[no_mangle]
pub unsafe extern "C" fn fredres_find_resonances(
    c: *const FredresCoefficients,
    r_min: f64,
    r_max: f64,
    tol: f64,
    out: *mut *mut FredresResonanceSet,
) -> FredresStatus {
    guard(|| {
        let c = c.as_ref().ok_or_else(|| null("coefficients"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        if !(r_max > r_min && tol > 0.0) {
            return Err((FredresStatus::InvalidArgument, "need r_min < r_max and tol > 0".into()));
        }
        let inner = lib(find_resonances(&c.inner, Region::annulus(r_min, r_max), tol, Method::Ode { steps_per_unit: None }))?;
        *out = Box::into_raw(Box::new(FredresResonanceSet { inner }));
        Ok(())
    })
}

/// Number of located zeros (clusters included, each counted once).
///
/// # Safety
/// `set` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn fredres_resonance_set_len(set: *const FredresResonanceSet) -> usize {
    set.as_ref().map(|s| s.inner.zeros.len() + s.inner.clusters.len()).unwrap_or(0)
}

/// Winding count of the annulus boundary.
///
/// # Safety
/// `set` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn fredres_resonance_set_boundary_count(set: *const FredresResonanceSet) -> i64 {
    set.as_ref().map(|s| s.inner.boundary_count).unwrap_or(0)
}

/// # Safety
/// `set` must be a live handle; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fredres_resonance_set_get(set: *const FredresResonanceSet, index: usize, out: *mut FredresResonance) -> FredresStatus {
    guard(|| {
        let set = set.as_ref().ok_or_else(|| null("set"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let z = set
            .inner
            .zeros
            .iter()
            .chain(&set.inner.clusters)
            .nth(index)
            .ok_or_else(|| (FredresStatus::InvalidArgument, format!("index {index} out of range")))?;
        *out = FredresResonance { re: z.k.re, im: z.k.im, multiplicity: z.multiplicity, residual: z.residual, certificate_radius: z.certificate.radius };
        Ok(())
    })
}

/// # Safety
/// `set` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn fredres_resonance_set_free(set: *mut FredresResonanceSet) {
    if !set.is_null() {
        drop(Box::from_raw(set));
    }
}
