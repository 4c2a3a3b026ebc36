//! C ABI over the pflab evaluators and experiment runner.
//!
//! Every fallible call returns a `PflabStatus` and writes its result through
//! an out pointer. On failure a message is kept per thread and can be read
//! with `pflab_last_error_message` until the next failing call. Objects
//! behind opaque handles are released with their matching `_free`.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use pflab::closed_forms::{self as cf, DriftLevel, SubProbabilityLaw};
use pflab::experiments::{run_experiment, RunConfig};
use pflab::{asian, pfh, Error, SuiteSummary};

/// Outcome of a call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PflabStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Domain = 3,
    InvalidGrid = 4,
    Quadrature = 5,
    EmptySample = 6,
    Model = 7,
    UnknownExperiment = 8,
    Config = 9,
    Io = 10,
    Json = 11,
    Panic = 12,
}

impl From<&Error> for PflabStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::InvalidGrid(_) => Self::InvalidGrid,
            Error::Domain(_) => Self::Domain,
            Error::Quadrature(_) => Self::Quadrature,
            Error::EmptySample => Self::EmptySample,
            Error::Model(_) => Self::Model,
            Error::UnknownExperiment(_) => Self::UnknownExperiment,
            Error::Config(_) => Self::Config,
            Error::Io(_) => Self::Io,
            Error::Json(_) => Self::Json,
        }
    }
}

struct Failure(PflabStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(PflabStatus::from(&e), e.to_string())
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

/// Runs `f`, turning errors and panics into a status and a stored message.
fn guard<F: FnOnce() -> Result<(), Failure>>(f: F) -> PflabStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => PflabStatus::Ok,
        Ok(Err(Failure(code, msg))) => {
            set_last_error(&msg);
            code
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(&format!("panic: {msg}"));
            PflabStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(PflabStatus::NullPointer, format!("{what} is null"))
}

unsafe fn write<T>(out: *mut T, v: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    unsafe { out.write(v) };
    Ok(())
}

unsafe fn slice<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(unsafe { std::slice::from_raw_parts(p, len) })
}

unsafe fn scalar(out: *mut f64, f: impl FnOnce() -> pflab::Result<f64>) -> PflabStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("output pointer"));
        }
        let v = f()?;
        unsafe { write(out, v) }
    })
}

/// Message of the last failed call on this thread, or NULL. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn pflab_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn pflab_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Probability that a Brownian bridge from 0 to m over [0, u] reaches lambda.
#[no_mangle]
pub unsafe extern "C" fn pflab_bridge_hit_prob(
    lambda: f64,
    m: f64,
    u: f64,
    out: *mut f64,
) -> PflabStatus {
    unsafe { scalar(out, || cf::bridge_hit_prob(lambda, m, u)) }
}

/// P(sup_{t<=1} B_t/(a+bt) > lambda | B_1 = m). `in_domain` may be NULL.
#[no_mangle]
pub unsafe extern "C" fn pflab_sloped_sup_prob(
    a: f64,
    b: f64,
    lambda: f64,
    m: f64,
    out: *mut f64,
    in_domain: *mut bool,
) -> PflabStatus {
    guard(|| {
        let r = cf::sloped_sup_prob(a, b, lambda, m)?;
        unsafe { write(out, r.value)? };
        if !in_domain.is_null() {
            unsafe { in_domain.write(r.in_domain) };
        }
        Ok(())
    })
}

/// Probability that B + nu*u avoids l on (s, t) given B_s = x, B_t = y.
#[no_mangle]
pub unsafe extern "C" fn pflab_sigma_pf(
    s: f64,
    t: f64,
    x: f64,
    y: f64,
    nu: f64,
    l: f64,
    out: *mut f64,
) -> PflabStatus {
    unsafe { scalar(out, || cf::sigma_pf(s, t, x, y, DriftLevel::new(nu, l))) }
}

/// exp(-2(x+nu*s-l)(y+nu*t-l)/(t-s)).
#[no_mangle]
pub unsafe extern "C" fn pflab_h_pfh_lnu(
    s: f64,
    t: f64,
    x: f64,
    y: f64,
    nu: f64,
    l: f64,
    out: *mut f64,
) -> PflabStatus {
    unsafe { scalar(out, || cf::h_pfh_lnu(s, t, x, y, DriftLevel::new(nu, l))) }
}

/// exp(a(y-x)/(t-s) - a^2/(2(t-s))).
#[no_mangle]
pub unsafe extern "C" fn pflab_h_pfh_harness(
    s: f64,
    t: f64,
    x: f64,
    y: f64,
    a: f64,
    out: *mut f64,
) -> PflabStatus {
    unsafe { scalar(out, || cf::h_pfh_harness(s, t, x, y, a)) }
}

/// exp(-2<x, y>/(t-s)) for `dim`-dimensional endpoints.
#[no_mangle]
pub unsafe extern "C" fn pflab_e_st(
    s: f64,
    t: f64,
    x: *const f64,
    y: *const f64,
    dim: usize,
    out: *mut f64,
) -> PflabStatus {
    guard(|| {
        let (x, y) = unsafe { (slice(x, dim, "x")?, slice(y, dim, "y")?) };
        let v = cf::e_st(s, t, x, y)?;
        unsafe { write(out, v) }
    })
}

/// Coefficient of l^p nu^q in the expansion of h^(l,nu)(s, t; x, y).
#[no_mangle]
pub unsafe extern "C" fn pflab_pf_hermite_coeff(
    p: usize,
    q: usize,
    s: f64,
    t: f64,
    x: f64,
    y: f64,
    out: *mut f64,
) -> PflabStatus {
    unsafe { scalar(out, || pfh::pf_hermite_coeff(p, q, s, t, x, y)) }
}

/// E[(exp(B_t - t/2) - K)^+].
#[no_mangle]
pub unsafe extern "C" fn pflab_bs_call_gbm(t: f64, k: f64, out: *mut f64) -> PflabStatus {
    unsafe { scalar(out, || cf::bs_call_gbm(t, k)) }
}

/// E[(K - exp(B_t - t/2))^+].
#[no_mangle]
pub unsafe extern "C" fn pflab_bs_put_gbm(t: f64, k: f64, out: *mut f64) -> PflabStatus {
    unsafe { scalar(out, || cf::bs_put_gbm(t, k)) }
}

/// P(G_K <= t) for the last passage of the geometric Brownian motion at K.
#[no_mangle]
pub unsafe extern "C" fn pflab_last_passage_cdf_g(t: f64, k: f64, out: *mut f64) -> PflabStatus {
    unsafe { scalar(out, || cf::last_passage_cdf_g(t, k)) }
}

/// Expected local time at K up to t of the geometric Brownian motion.
#[no_mangle]
pub unsafe extern "C" fn pflab_expected_local_time_gbm(
    k: f64,
    t: f64,
    out: *mut f64,
) -> PflabStatus {
    unsafe { scalar(out, || cf::expected_local_time_gbm(k, t)) }
}

#[no_mangle]
pub unsafe extern "C" fn pflab_rho(u: f64, out: *mut f64) -> PflabStatus {
    unsafe { scalar(out, || cf::rho(u)) }
}

/// r(t) = E[(M_t - 1)^+] for M = 1/BES(3) started at 1.
#[no_mangle]
pub unsafe extern "C" fn pflab_r_of_t(t: f64, out: *mut f64) -> PflabStatus {
    unsafe { scalar(out, || cf::r_of_t(t)) }
}

/// a_n(t) = E[(A_t/t)^n] by quadrature, 1 <= n <= 4.
#[no_mangle]
pub unsafe extern "C" fn pflab_asian_moment(n: usize, t: f64, out: *mut f64) -> PflabStatus {
    unsafe { scalar(out, || asian::a_n_quadrature(n, t)) }
}

/// C(s_1, ..., s_n) for ordered non-negative times.
#[no_mangle]
pub unsafe extern "C" fn pflab_c_quadratic(s: *const f64, n: usize, out: *mut f64) -> PflabStatus {
    guard(|| {
        let s = unsafe { slice(s, n, "s")? };
        let v = cf::c_quadratic(s)?;
        unsafe { write(out, v) }
    })
}

/// Law of the last visit of a level before a horizon: an atom at 0 plus a
/// density.
pub struct PflabLaw(SubProbabilityLaw);

unsafe fn new_law(
    out: *mut *mut PflabLaw,
    make: impl FnOnce() -> pflab::Result<SubProbabilityLaw>,
) -> PflabStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("output pointer"));
        }
        let law = make()?;
        unsafe { write(out, Box::into_raw(Box::new(PflabLaw(law)))) }
    })
}

unsafe fn with_law(
    law: *const PflabLaw,
    out: *mut f64,
    f: impl FnOnce(&SubProbabilityLaw) -> pflab::Result<f64>,
) -> PflabStatus {
    guard(|| {
        let law = unsafe { law.as_ref() }.ok_or_else(|| null("law"))?;
        if out.is_null() {
            return Err(null("output pointer"));
        }
        let v = f(&law.0)?;
        unsafe { write(out, v) }
    })
}

/// Last visit of x before t by a driftless Brownian motion from 0.
#[no_mangle]
pub unsafe extern "C" fn pflab_law_g0(x: f64, t: f64, out: *mut *mut PflabLaw) -> PflabStatus {
    unsafe { new_law(out, || cf::g0_law(x, t)) }
}

/// Last visit of x before t by B + nu*u.
#[no_mangle]
pub unsafe extern "C" fn pflab_law_g_nu(
    x: f64,
    nu: f64,
    t: f64,
    out: *mut *mut PflabLaw,
) -> PflabStatus {
    unsafe { new_law(out, || cf::g_nu_law(x, nu, t)) }
}

/// Mass of the atom at 0 (the level is never visited).
#[no_mangle]
pub unsafe extern "C" fn pflab_law_atom(law: *const PflabLaw, out: *mut f64) -> PflabStatus {
    unsafe { with_law(law, out, |l| Ok(l.atom())) }
}

#[no_mangle]
pub unsafe extern "C" fn pflab_law_density(
    law: *const PflabLaw,
    u: f64,
    out: *mut f64,
) -> PflabStatus {
    unsafe { with_law(law, out, |l| Ok(l.density(u))) }
}

/// P(g <= u), including the atom.
#[no_mangle]
pub unsafe extern "C" fn pflab_law_cdf(law: *const PflabLaw, u: f64, out: *mut f64) -> PflabStatus {
    unsafe { with_law(law, out, |l| l.cdf(u)) }
}

#[no_mangle]
pub unsafe extern "C" fn pflab_law_total_mass(law: *const PflabLaw, out: *mut f64) -> PflabStatus {
    unsafe { with_law(law, out, |l| l.total_mass()) }
}

/// Releases a law; NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn pflab_law_free(law: *mut PflabLaw) {
    if !law.is_null() {
        drop(unsafe { Box::from_raw(law) });
    }
}

/// Scale of an experiment run.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PflabRunConfig {
    pub seed: u64,
    pub paths: usize,
    pub grid: usize,
    pub tol_multiplier: f64,
}

impl From<PflabRunConfig> for RunConfig {
    fn from(c: PflabRunConfig) -> Self {
        RunConfig {
            seed: c.seed,
            paths: c.paths,
            grid: c.grid,
            tol_multiplier: c.tol_multiplier,
        }
    }
}

/// Defaults used by the command-line tool.
#[no_mangle]
pub extern "C" fn pflab_run_config_default() -> PflabRunConfig {
    let d = RunConfig::default();
    PflabRunConfig {
        seed: d.seed,
        paths: d.paths,
        grid: d.grid,
        tol_multiplier: d.tol_multiplier,
    }
}

/// Result of an experiment run.
pub struct PflabSummary(SuiteSummary);

/// Runs an experiment selector (or "all"). A run whose checks fail still
/// returns PFLAB_STATUS_OK; inspect the summary for the outcome.
#[no_mangle]
pub unsafe extern "C" fn pflab_run_experiment(
    selector: *const c_char,
    config: *const PflabRunConfig,
    out: *mut *mut PflabSummary,
) -> PflabStatus {
    guard(|| {
        if selector.is_null() {
            return Err(null("selector"));
        }
        let cfg = unsafe { config.as_ref() }.ok_or_else(|| null("config"))?;
        if out.is_null() {
            return Err(null("output pointer"));
        }
        let name = unsafe { CStr::from_ptr(selector) }
            .to_str()
            .map_err(|e| Failure(PflabStatus::InvalidUtf8, format!("selector: {e}")))?;
        let summary = run_experiment(name, &RunConfig::from(*cfg))?;
        unsafe { write(out, Box::into_raw(Box::new(PflabSummary(summary)))) }
    })
}

/// Number of passed and failed gated checks. Either pointer may be NULL.
#[no_mangle]
pub unsafe extern "C" fn pflab_summary_counts(
    summary: *const PflabSummary,
    passed: *mut usize,
    failed: *mut usize,
) -> PflabStatus {
    guard(|| {
        let s = unsafe { summary.as_ref() }.ok_or_else(|| null("summary"))?;
        if !passed.is_null() {
            unsafe { passed.write(s.0.passed) };
        }
        if !failed.is_null() {
            unsafe { failed.write(s.0.failed) };
        }
        Ok(())
    })
}

/// JSON report as a new string; release it with `pflab_string_free`.
#[no_mangle]
pub unsafe extern "C" fn pflab_summary_json(
    summary: *const PflabSummary,
    out: *mut *mut c_char,
) -> PflabStatus {
    guard(|| {
        let s = unsafe { summary.as_ref() }.ok_or_else(|| null("summary"))?;
        if out.is_null() {
            return Err(null("output pointer"));
        }
        let json = s.0.to_json().map_err(Error::from)?;
        let c = CString::new(json).map_err(|e| Failure(PflabStatus::Json, e.to_string()))?;
        unsafe { write(out, c.into_raw()) }
    })
}

/// Releases a summary; NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn pflab_summary_free(summary: *mut PflabSummary) {
    if !summary.is_null() {
        drop(unsafe { Box::from_raw(summary) });
    }
}

/// Releases a string returned by this library; NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn pflab_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(unsafe { CString::from_raw(s) });
    }
}
