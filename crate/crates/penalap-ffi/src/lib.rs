//! C ABI for penalap.
//!
//! Every function returns a [`PenalapStatus`]; on failure the message is
//! available from [`penalap_last_error`] on the same thread. Handles are
//! opaque and must be released with their `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use penalap::analytic::{self, Case1DSameFlux};
use penalap::harness::{self, CaseConfig, ConvectionReport, SolveOutput};
use penalap::Error;

/// Result codes. Values are stable.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PenalapStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Config = 3,
    Solver = 4,
    Budget = 5,
    Io = 6,
    Panic = 7,
    /// The caller's buffer is too short; nothing was written.
    BufferTooSmall = 8,
}

/// A parsed case file.
pub struct PenalapCase(CaseConfig);

/// Output of a case with a closed-form oracle.
pub struct PenalapSolution(SolveOutput);

/// A steady convection state with its diagnostics.
pub struct PenalapConvection(ConvectionReport);

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct PenalapErrorReport {
    pub n: usize,
    pub h: f64,
    pub eta: f64,
    pub err_linf: f64,
    pub err_l1: f64,
    pub err_l2: f64,
    pub runtime_s: f64,
    pub iterations: usize,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct PenalapConvectionSummary {
    pub converged: bool,
    pub steps: usize,
    pub time: f64,
    pub nusselt: f64,
    pub wall_flux: f64,
    pub asymmetry_phi: f64,
    pub asymmetry_speed: f64,
    pub sor_sweeps: usize,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> PenalapStatus {
    match e {
        Error::InvalidArgument(_) | Error::Mismatch(_) => PenalapStatus::InvalidArgument,
        Error::Config(_) | Error::Stability(_) => PenalapStatus::Config,
        Error::Budget(_) => PenalapStatus::Budget,
        Error::Io(_) => PenalapStatus::Io,
        _ => PenalapStatus::Solver,
    }
}

/// Runs `f`, turning errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), (PenalapStatus, String)>) -> PenalapStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            PenalapStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal panic: {msg}"));
            PenalapStatus::Panic
        }
    }
}

fn lib<T>(r: penalap::Result<T>) -> Result<T, (PenalapStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(what: &str) -> (PenalapStatus, String) {
    (PenalapStatus::NullPointer, format!("{what} is null"))
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, (PenalapStatus, String)> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn write_out<T>(p: *mut T, v: T, what: &str) -> Result<(), (PenalapStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    p.write(v);
    Ok(())
}

/// Copies `src` into `buf` of capacity `cap`; `len` receives the needed length.
unsafe fn copy_out(src: &[f64], buf: *mut f64, cap: usize, len: *mut usize) -> Result<(), (PenalapStatus, String)> {
    if !len.is_null() {
        *len = src.len();
    }
    if buf.is_null() {
        return if cap == 0 { Ok(()) } else { Err(null("buffer")) };
    }
    if cap < src.len() {
        return Err((PenalapStatus::BufferTooSmall, format!("buffer holds {cap} values, need {}", src.len())));
    }
    ptr::copy_nonoverlapping(src.as_ptr(), buf, src.len());
    Ok(())
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next call into the library from this thread.
#[no_mangle]
pub extern "C" fn penalap_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn penalap_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Exact same-flux solution `w(x)` for source `m^2 cos(m x)` and flux `alpha`.
///
/// # Safety
/// `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn penalap_exact_same_flux(m: u32, alpha: f64, eta: f64, x: f64, out: *mut f64) -> PenalapStatus {
    guard(|| {
        let case = lib(Case1DSameFlux::new(m, alpha, eta))?;
        write_out(out, analytic::exact_1d_same_flux(x, &case), "out")
    })
}

/// Closed-form penalized same-flux solution `v(x)`.
///
/// # Safety
/// `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn penalap_penalized_same_flux(m: u32, alpha: f64, eta: f64, x: f64, out: *mut f64) -> PenalapStatus {
    guard(|| {
        let case = lib(Case1DSameFlux::new(m, alpha, eta))?;
        write_out(out, analytic::penalized_1d_same_flux(x, &case), "out")
    })
}

/// Least-squares slope of `log err` against `log h`.
///
/// # Safety
/// `h` and `err` must each point to `len` values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn penalap_fit_order(h: *const f64, err: *const f64, len: usize, out: *mut f64) -> PenalapStatus {
    guard(|| {
        if h.is_null() || err.is_null() {
            return Err(null("h or err"));
        }
        let hs = std::slice::from_raw_parts(h, len);
        let es = std::slice::from_raw_parts(err, len);
        let pts: Vec<(f64, f64)> = hs.iter().copied().zip(es.iter().copied()).collect();
        write_out(out, lib(harness::fit_order(&pts))?, "out")
    })
}

/// Parses and validates a case from `key = value` text.
///
/// # Safety
/// `text` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn penalap_case_parse(text: *const c_char, out: *mut *mut PenalapCase) -> PenalapStatus {
    guard(|| {
        if text.is_null() {
            return Err(null("text"));
        }
        let s = CStr::from_ptr(text).to_str().map_err(|_| (PenalapStatus::InvalidArgument, "case text is not UTF-8".to_string()))?;
        let cfg: CaseConfig = lib(s.parse())?;
        lib(cfg.validate())?;
        write_out(out, Box::into_raw(Box::new(PenalapCase(cfg))), "out")
    })
}

/// Overrides the grid size of a parsed case.
///
/// # Safety
/// `case` must come from [`penalap_case_parse`].
#[no_mangle]
pub unsafe extern "C" fn penalap_case_set_n(case: *mut PenalapCase, n: usize) -> PenalapStatus {
    guard(|| {
        let c = case.as_mut().ok_or_else(|| null("case"))?;
        c.0 = c.0.with_n(n);
        Ok(())
    })
}

/// Overrides every penalization parameter of a parsed case.
///
/// # Safety
/// `case` must come from [`penalap_case_parse`].
#[no_mangle]
pub unsafe extern "C" fn penalap_case_set_eta(case: *mut PenalapCase, eta: f64) -> PenalapStatus {
    guard(|| {
        let c = case.as_mut().ok_or_else(|| null("case"))?;
        let next = c.0.with_eta(eta);
        lib(next.validate())?;
        c.0 = next;
        Ok(())
    })
}

/// # Safety
/// `case` must come from [`penalap_case_parse`] or be null.
#[no_mangle]
pub unsafe extern "C" fn penalap_case_free(case: *mut PenalapCase) {
    if !case.is_null() {
        drop(Box::from_raw(case));
    }
}

/// Solves a case that has a closed-form oracle.
///
/// # Safety
/// `case` must come from [`penalap_case_parse`]; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn penalap_solve(case: *const PenalapCase, out: *mut *mut PenalapSolution) -> PenalapStatus {
    guard(|| {
        let c = deref(case, "case")?;
        let sol = lib(harness::run_error_case(&c.0))?;
        write_out(out, Box::into_raw(Box::new(PenalapSolution(sol))), "out")
    })
}

/// # Safety
/// `sol` must come from [`penalap_solve`]; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn penalap_solution_report(sol: *const PenalapSolution, out: *mut PenalapErrorReport) -> PenalapStatus {
    guard(|| {
        let s = &deref(sol, "solution")?.0;
        let r = &s.report;
        let rep = PenalapErrorReport {
            n: r.n,
            h: r.h,
            eta: r.eta,
            err_linf: r.err_linf,
            err_l1: r.err_l1,
            err_l2: r.err_l2,
            runtime_s: r.runtime_s,
            iterations: s.stats.iterations,
        };
        write_out(out, rep, "out")
    })
}

/// Copies the numerical solution at grid nodes (x fastest). Pass a null
/// buffer with `cap = 0` to query the length.
///
/// # Safety
/// `buf` must hold `cap` values; `len` may be null.
#[no_mangle]
pub unsafe extern "C" fn penalap_solution_values(sol: *const PenalapSolution, buf: *mut f64, cap: usize, len: *mut usize) -> PenalapStatus {
    guard(|| copy_out(deref(sol, "solution")?.0.numerical.values(), buf, cap, len))
}

/// Copies the exact solution at grid nodes; NaN outside the fluid.
///
/// # Safety
/// As for [`penalap_solution_values`].
#[no_mangle]
pub unsafe extern "C" fn penalap_solution_reference(
    sol: *const PenalapSolution,
    buf: *mut f64,
    cap: usize,
    len: *mut usize,
) -> PenalapStatus {
    guard(|| copy_out(&deref(sol, "solution")?.0.reference, buf, cap, len))
}

/// # Safety
/// `sol` must come from [`penalap_solve`] or be null.
#[no_mangle]
pub unsafe extern "C" fn penalap_solution_free(sol: *mut PenalapSolution) {
    if !sol.is_null() {
        drop(Box::from_raw(sol));
    }
}

/// Marches a convection case to steady state. This can take minutes.
///
/// # Safety
/// `case` must come from [`penalap_case_parse`]; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn penalap_convection_run(case: *const PenalapCase, out: *mut *mut PenalapConvection) -> PenalapStatus {
    guard(|| {
        let c = deref(case, "case")?;
        let rep = lib(harness::run_convection(&c.0, |_| {}))?;
        write_out(out, Box::into_raw(Box::new(PenalapConvection(rep))), "out")
    })
}

/// # Safety
/// `conv` must come from [`penalap_convection_run`]; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn penalap_convection_summary(conv: *const PenalapConvection, out: *mut PenalapConvectionSummary) -> PenalapStatus {
    guard(|| {
        let r = &deref(conv, "convection")?.0;
        let s = PenalapConvectionSummary {
            converged: r.log.converged,
            steps: r.state.step,
            time: r.state.time,
            nusselt: r.nusselt,
            wall_flux: r.wall_flux,
            asymmetry_phi: r.asymmetry[0],
            asymmetry_speed: r.asymmetry[1],
            sor_sweeps: r.log.total_sor_sweeps,
        };
        write_out(out, s, "out")
    })
}

/// Copies the inner-wall profile: angles in degrees and wall temperatures.
///
/// # Safety
/// `theta_deg` and `phi` must each hold `cap` values; `len` may be null.
#[no_mangle]
pub unsafe extern "C" fn penalap_convection_profile(
    conv: *const PenalapConvection,
    theta_deg: *mut f64,
    phi: *mut f64,
    cap: usize,
    len: *mut usize,
) -> PenalapStatus {
    guard(|| {
        let prof = &deref(conv, "convection")?.0.profile;
        let t: Vec<f64> = prof.iter().map(|p| p.theta_deg).collect();
        let v: Vec<f64> = prof.iter().map(|p| p.phi).collect();
        copy_out(&t, theta_deg, cap, len)?;
        copy_out(&v, phi, cap, len)
    })
}

/// Copies the cell-centred temperature (x fastest).
///
/// # Safety
/// As for [`penalap_solution_values`].
#[no_mangle]
pub unsafe extern "C" fn penalap_convection_temperature(
    conv: *const PenalapConvection,
    buf: *mut f64,
    cap: usize,
    len: *mut usize,
) -> PenalapStatus {
    guard(|| copy_out(deref(conv, "convection")?.0.state.phi.values(), buf, cap, len))
}

/// # Safety
/// `conv` must come from [`penalap_convection_run`] or be null.
#[no_mangle]
pub unsafe extern "C" fn penalap_convection_free(conv: *mut PenalapConvection) {
    if !conv.is_null() {
        drop(Box::from_raw(conv));
    }
}
