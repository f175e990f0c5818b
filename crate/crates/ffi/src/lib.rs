//! C ABI over the `mocv` library.
//!
//! Scenarios are opaque handles created from TOML text or a file and released
//! with [`mocv_scenario_free`]. Every fallible call returns a [`MocvStatus`];
//! on failure the message is kept per thread and can be copied out with
//! [`mocv_last_error_message`]. Output arrays are caller-allocated.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;
use std::slice;

use mocv::config::ScenarioFile;
use mocv::hjb::{check_hjb, HjbConfig};
use mocv::hopflax::{solve_p_k, value_records};
use mocv::{Error, Scenario};
use nalgebra::DVector;

/// Opaque scenario handle.
pub struct MocvScenario {
    inner: Scenario,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MocvStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    ParseError = 3,
    ConfigError = 4,
    HypothesisViolated = 5,
    SolverFailed = 6,
    DomainError = 7,
    IoError = 8,
    BufferTooSmall = 9,
    Panic = 10,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: impl Into<String>) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.into());
}

fn status_of(err: &Error) -> MocvStatus {
    match err.root() {
        Error::Parse(_) => MocvStatus::ParseError,
        Error::Config(_) => MocvStatus::ConfigError,
        Error::Usage(_) => MocvStatus::InvalidArgument,
        Error::Domain(_) => MocvStatus::DomainError,
        Error::Hypothesis { .. } => MocvStatus::HypothesisViolated,
        Error::Io(_) => MocvStatus::IoError,
        _ => MocvStatus::SolverFailed,
    }
}

/// Runs `f`, converting errors and panics into status codes.
fn guard<F>(f: F) -> MocvStatus
where
    F: FnOnce() -> Result<(), (MocvStatus, String)>,
{
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            MocvStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            MocvStatus::Panic
        }
    }
}

fn lib(err: Error) -> (MocvStatus, String) {
    (status_of(&err), err.to_string())
}

fn null(what: &str) -> (MocvStatus, String) {
    (MocvStatus::NullPointer, format!("{what} is null"))
}

unsafe fn scenario<'a>(h: *const MocvScenario) -> Result<&'a Scenario, (MocvStatus, String)> {
    // SAFETY: non-null handles come from `into_handle` and are live until freed.
    unsafe { h.as_ref() }.map(|s| &s.inner).ok_or_else(|| null("scenario"))
}

unsafe fn state(x: *const f64, n: usize, scn: &Scenario) -> Result<DVector<f64>, (MocvStatus, String)> {
    if x.is_null() {
        return Err(null("x"));
    }
    if n != scn.state_dim() {
        return Err((
            MocvStatus::InvalidArgument,
            format!("x has length {n}, scenario state dimension is {}", scn.state_dim()),
        ));
    }
    // SAFETY: caller guarantees `x` points to `n` readable doubles.
    Ok(DVector::from_column_slice(unsafe { slice::from_raw_parts(x, n) }))
}

unsafe fn out_slice<'a>(out: *mut f64, len: usize, need: usize, what: &str) -> Result<&'a mut [f64], (MocvStatus, String)> {
    if out.is_null() {
        return Err(null(what));
    }
    if len < need {
        return Err((MocvStatus::BufferTooSmall, format!("{what} holds {len} values, {need} needed")));
    }
    // SAFETY: caller guarantees `out` points to `len` writable doubles.
    Ok(unsafe { slice::from_raw_parts_mut(out, len) })
}

fn into_handle(scn: Scenario, out: *mut *mut MocvScenario) {
    // SAFETY: `out` was checked non-null by the caller of this helper.
    unsafe { *out = Box::into_raw(Box::new(MocvScenario { inner: scn })) };
}

fn k_override(k_grid: u32) -> Option<usize> {
    (k_grid > 0).then_some(k_grid as usize)
}

/// Parses a scenario from NUL-terminated TOML text. `k_grid = 0` keeps the
/// grid size of the text.
///
/// # Safety
/// `text` must be a valid NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn mocv_scenario_from_toml(text: *const c_char, k_grid: u32, out: *mut *mut MocvScenario) -> MocvStatus {
    guard(|| {
        if text.is_null() {
            return Err(null("text"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        // SAFETY: caller guarantees a NUL-terminated string.
        let text = unsafe { CStr::from_ptr(text) }
            .to_str()
            .map_err(|_| (MocvStatus::InvalidArgument, "text is not UTF-8".to_string()))?;
        let scn = ScenarioFile::parse(text).and_then(|f| f.build(k_override(k_grid), None)).map_err(lib)?;
        into_handle(scn, out);
        Ok(())
    })
}

/// Loads a scenario file.
///
/// # Safety
/// `path` must be a valid NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn mocv_scenario_from_file(path: *const c_char, k_grid: u32, out: *mut *mut MocvScenario) -> MocvStatus {
    guard(|| {
        if path.is_null() {
            return Err(null("path"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        // SAFETY: caller guarantees a NUL-terminated string.
        let path = unsafe { CStr::from_ptr(path) }
            .to_str()
            .map_err(|_| (MocvStatus::InvalidArgument, "path is not UTF-8".to_string()))?;
        let scn = ScenarioFile::load(Path::new(path))
            .and_then(|f| f.build(k_override(k_grid), None))
            .map_err(lib)?;
        into_handle(scn, out);
        Ok(())
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `scn` must come from one of the constructors and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn mocv_scenario_free(scn: *mut MocvScenario) {
    if !scn.is_null() {
        // SAFETY: handle was created by `Box::into_raw` in `into_handle`.
        drop(unsafe { Box::from_raw(scn) });
    }
}

/// State dimension `n`, objective dimension `d` and base grid size `K`.
///
/// # Safety
/// All pointers must be valid; `scn` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn mocv_scenario_dims(scn: *const MocvScenario, n: *mut usize, d: *mut usize, k: *mut usize) -> MocvStatus {
    guard(|| {
        let scn = unsafe { scenario(scn) }?;
        if n.is_null() || d.is_null() || k.is_null() {
            return Err(null("output"));
        }
        // SAFETY: checked non-null above.
        unsafe {
            *n = scn.state_dim();
            *d = scn.objective_dim();
            *k = scn.cone().len();
        }
        Ok(())
    })
}

/// Copies base direction `k` (length `d`) into `out`.
///
/// # Safety
/// `out` must hold `len` doubles; `scn` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn mocv_base_direction(scn: *const MocvScenario, k: usize, out: *mut f64, len: usize) -> MocvStatus {
    guard(|| {
        let scn = unsafe { scenario(scn) }?;
        let zeta = scn.zeta(k).map_err(lib)?;
        let out = unsafe { out_slice(out, len, zeta.len(), "out") }?;
        out[..zeta.len()].copy_from_slice(zeta.as_slice());
        Ok(())
    })
}

/// Value thresholds `v_k` of `U(t, x)` for every base direction.
///
/// # Safety
/// `x` must hold `n` doubles and `out` `len` doubles; `scn` must be live.
#[no_mangle]
pub unsafe extern "C" fn mocv_value_thresholds(
    scn: *const MocvScenario,
    t: f64,
    x: *const f64,
    n: usize,
    out: *mut f64,
    len: usize,
) -> MocvStatus {
    guard(|| {
        let scn = unsafe { scenario(scn) }?;
        let x = unsafe { state(x, n, scn) }?;
        let out = unsafe { out_slice(out, len, scn.cone().len(), "out") }?;
        for (o, r) in out.iter_mut().zip(value_records(scn, t, &x).map_err(lib)?) {
            *o = r.threshold;
        }
        Ok(())
    })
}

/// Solves for `p(t, x, ζ_k)`. `iterations` and `residual` may be null.
///
/// # Safety
/// `x` and `p_out` must hold `n` doubles; `scn` must be live.
#[no_mangle]
pub unsafe extern "C" fn mocv_solve_p(
    scn: *const MocvScenario,
    t: f64,
    x: *const f64,
    n: usize,
    k: usize,
    p_out: *mut f64,
    iterations: *mut u32,
    residual: *mut f64,
) -> MocvStatus {
    guard(|| {
        let scn = unsafe { scenario(scn) }?;
        let x = unsafe { state(x, n, scn) }?;
        let p_out = unsafe { out_slice(p_out, n, n, "p_out") }?;
        let sol = solve_p_k(scn, t, &x, k).map_err(lib)?;
        p_out.copy_from_slice(&sol.p_star);
        // SAFETY: optional outputs are written only when non-null.
        unsafe {
            if let Some(it) = iterations.as_mut() {
                *it = sol.iterations as u32;
            }
            if let Some(r) = residual.as_mut() {
                *r = sol.residual;
            }
        }
        Ok(())
    })
}

/// Largest `|HJB residual|` over the base directions at `(t, x)`.
///
/// # Safety
/// `x` must hold `n` doubles and `out` must be valid; `scn` must be live.
#[no_mangle]
pub unsafe extern "C" fn mocv_hjb_max_residual(scn: *const MocvScenario, t: f64, x: *const f64, n: usize, out: *mut f64) -> MocvStatus {
    guard(|| {
        let scn = unsafe { scenario(scn) }?;
        let x = unsafe { state(x, n, scn) }?;
        if out.is_null() {
            return Err(null("out"));
        }
        let cfg = HjbConfig {
            jobs: 1,
            ..HjbConfig::for_scenario(scn)
        };
        let report = check_hjb(scn, &[t], &[x], &cfg).map_err(lib)?;
        // SAFETY: checked non-null above.
        unsafe { *out = report.max_residual };
        Ok(())
    })
}

/// Copies the calling thread's last error message into `buf` (NUL
/// terminated, truncated to `len`). Returns the full message length plus one,
/// so a caller can size the buffer with a first call using `len = 0`.
///
/// # Safety
/// `buf` must hold `len` bytes or be null with `len = 0`.
#[no_mangle]
pub unsafe extern "C" fn mocv_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        let bytes = msg.as_bytes();
        if !buf.is_null() && len > 0 {
            let m = bytes.len().min(len - 1);
            // SAFETY: caller guarantees `len` writable bytes.
            unsafe {
                ptr::copy_nonoverlapping(bytes.as_ptr().cast::<c_char>(), buf, m);
                *buf.add(m) = 0;
            }
        }
        bytes.len() + 1
    })
}

/// Library version, a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn mocv_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
