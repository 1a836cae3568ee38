//! C ABI over the `fracbvp` library.
//!
//! Every fallible function returns an [`FbvpStatus`]; on failure the message
//! is available from [`fbvp_last_error_message`] on the same thread. Handles
//! are opaque and must be released with their `_free` function. Strings
//! returned through `char **` must be released with [`fbvp_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use fracbvp::error::Error;
use fracbvp::problem::{Discretization, SolverSettings};
use fracbvp::solver::SolveReport;
use fracbvp::theorems::{self, TheoremId, TheoremParams};
use fracbvp::{exprlang, specialfn, Problem};

/// Result codes shared by every entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FbvpStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    ParseError = 3,
    DomainError = 4,
    NumericError = 5,
    BufferTooSmall = 6,
    Panic = 7,
}

/// A boundary value problem with its numerical settings.
pub struct FbvpProblem {
    inner: Problem,
}

/// The outcome of a solve: grid values plus convergence data.
pub struct FbvpSolution {
    inner: SolveReport,
}

/// Inputs for [`fbvp_check_theorem`]. NaN marks a value as absent; `k_env`
/// may be null.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct FbvpTheoremParams {
    pub rho: f64,
    pub rho1: f64,
    pub rho2: f64,
    pub m1: f64,
    pub m2: f64,
    pub nu: f64,
    pub l: f64,
    pub mu: f64,
    pub sigma: f64,
    pub k: f64,
    pub k_env: *const c_char,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

struct Fail(FbvpStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Parse(_) => FbvpStatus::ParseError,
            Error::Domain(_) | Error::Eval(_) => FbvpStatus::DomainError,
            Error::Quadrature(_) | Error::NegativeIterate { .. } => FbvpStatus::NumericError,
            Error::Problem(_) | Error::Invalid(_) => FbvpStatus::InvalidArgument,
        };
        Fail(status, e.to_string())
    }
}

fn invalid(msg: impl Into<String>) -> Fail {
    Fail(FbvpStatus::InvalidArgument, msg.into())
}

/// Runs `body`, recording any failure or panic as the thread's last error.
fn guard(body: impl FnOnce() -> Result<(), Fail>) -> FbvpStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => FbvpStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            FbvpStatus::Panic
        }
    }
}

unsafe fn c_str<'a>(p: *const c_char, name: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(Fail(FbvpStatus::NullPointer, format!("{name} is null")));
    }
    CStr::from_ptr(p).to_str().map_err(|_| invalid(format!("{name} is not valid UTF-8")))
}

unsafe fn out_ptr<'a, T>(p: *mut T, name: &str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or_else(|| Fail(FbvpStatus::NullPointer, format!("{name} is null")))
}

unsafe fn handle<'a, T>(p: *const T, name: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| Fail(FbvpStatus::NullPointer, format!("{name} is null")))
}

fn optional(x: f64) -> Option<f64> {
    (!x.is_nan()).then_some(x)
}

/// Message of the last failure on this thread, or null. The pointer stays
/// valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn fbvp_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Γ(x).
///
/// # Safety
/// `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn fbvp_gamma(x: f64, out: *mut f64) -> FbvpStatus {
    guard(|| {
        *out_ptr(out, "out")? = specialfn::gamma(x).map_err(Error::from)?;
        Ok(())
    })
}

/// B(p, q).
///
/// # Safety
/// `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn fbvp_beta(p: f64, q: f64, out: *mut f64) -> FbvpStatus {
    guard(|| {
        *out_ptr(out, "out")? = specialfn::beta(p, q).map_err(Error::from)?;
        Ok(())
    })
}

/// Builds a problem from orders and expression strings.
///
/// # Safety
/// `a` and `f` must be null or NUL-terminated; `out` must be null or valid
/// for writes.
#[no_mangle]
pub unsafe extern "C" fn fbvp_problem_new(
    alpha: f64,
    eta: f64,
    p: f64,
    a: *const c_char,
    f: *const c_char,
    out: *mut *mut FbvpProblem,
) -> FbvpStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let (a, f) = (c_str(a, "a")?, c_str(f, "f")?);
        let a = exprlang::parse(a).map_err(|e| Fail(FbvpStatus::ParseError, format!("a: {e}")))?;
        let f = exprlang::parse(f).map_err(|e| Fail(FbvpStatus::ParseError, format!("f: {e}")))?;
        let inner = Problem::new(alpha, eta, p, a, f).map_err(Error::from)?;
        *out = Box::into_raw(Box::new(FbvpProblem { inner }));
        Ok(())
    })
}

/// Builds a problem from problem-file text.
///
/// # Safety
/// `text` must be null or NUL-terminated; `out` must be null or valid for
/// writes.
#[no_mangle]
pub unsafe extern "C" fn fbvp_problem_from_toml(text: *const c_char, out: *mut *mut FbvpProblem) -> FbvpStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let inner = Problem::from_toml(c_str(text, "text")?).map_err(|e| Fail(FbvpStatus::ParseError, e.to_string()))?;
        *out = Box::into_raw(Box::new(FbvpProblem { inner }));
        Ok(())
    })
}

/// Canonical problem-file text for `problem`.
///
/// # Safety
/// `problem` must be null or a live handle; `out` must be null or valid for
/// writes. Free the string with [`fbvp_string_free`].
#[no_mangle]
pub unsafe extern "C" fn fbvp_problem_to_toml(problem: *const FbvpProblem, out: *mut *mut c_char) -> FbvpStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let text = handle(problem, "problem")?.inner.to_toml();
        *out = CString::new(text).map_err(|_| invalid("NUL in output"))?.into_raw();
        Ok(())
    })
}

/// Overrides the panel count of the solution grid.
///
/// # Safety
/// `problem` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn fbvp_problem_set_panels(problem: *mut FbvpProblem, panels: usize) -> FbvpStatus {
    guard(|| {
        let pb = problem.as_mut().ok_or_else(|| Fail(FbvpStatus::NullPointer, "problem is null".into()))?;
        let d = Discretization { panels, ..pb.inner.discretization };
        pb.inner = pb.inner.clone().with_discretization(d).map_err(Error::from)?;
        Ok(())
    })
}

/// Overrides the solver tolerance, iteration cap and damping.
///
/// # Safety
/// `problem` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn fbvp_problem_set_solver(
    problem: *mut FbvpProblem,
    tol: f64,
    max_iter: usize,
    damping: f64,
) -> FbvpStatus {
    guard(|| {
        let pb = problem.as_mut().ok_or_else(|| Fail(FbvpStatus::NullPointer, "problem is null".into()))?;
        let s = SolverSettings { tol, max_iter, damping };
        pb.inner = pb.inner.clone().with_solver(s).map_err(Error::from)?;
        Ok(())
    })
}

/// Releases a problem. Null is ignored.
///
/// # Safety
/// `problem` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn fbvp_problem_free(problem: *mut FbvpProblem) {
    if !problem.is_null() {
        drop(Box::from_raw(problem));
    }
}

/// Λ₁ of the problem.
///
/// # Safety
/// `problem` must be null or a live handle; `out` must be null or valid for
/// writes.
#[no_mangle]
pub unsafe extern "C" fn fbvp_lambda1(problem: *const FbvpProblem, out: *mut f64) -> FbvpStatus {
    guard(|| {
        *out_ptr(out, "out")? = theorems::lambda1(&handle(problem, "problem")?.inner)?;
        Ok(())
    })
}

/// Λ₂ of the problem for cone parameter `rho`.
///
/// # Safety
/// `problem` must be null or a live handle; `out` must be null or valid for
/// writes.
#[no_mangle]
pub unsafe extern "C" fn fbvp_lambda2(problem: *const FbvpProblem, rho: f64, out: *mut f64) -> FbvpStatus {
    guard(|| {
        *out_ptr(out, "out")? = theorems::lambda2(&handle(problem, "problem")?.inner, rho)?;
        Ok(())
    })
}

/// Checks theorem `theorem` ("3.1" to "3.5"). Writes the text report to
/// `report` and 1 or 0 to `holds`.
///
/// # Safety
/// Pointers must be null or valid; `theorem` and `params.k_env` must be
/// NUL-terminated when non-null. Free the report with [`fbvp_string_free`].
#[no_mangle]
pub unsafe extern "C" fn fbvp_check_theorem(
    problem: *const FbvpProblem,
    theorem: *const c_char,
    params: *const FbvpTheoremParams,
    report: *mut *mut c_char,
    holds: *mut c_int,
) -> FbvpStatus {
    guard(|| {
        let pb = &handle(problem, "problem")?.inner;
        let id: TheoremId = c_str(theorem, "theorem")?.parse()?;
        let p = handle(params, "params")?;
        let k_env = if p.k_env.is_null() {
            None
        } else {
            let text = c_str(p.k_env, "k_env")?;
            Some(exprlang::parse(text).map_err(|e| Fail(FbvpStatus::ParseError, format!("k_env: {e}")))?)
        };
        let params = TheoremParams {
            rho: optional(p.rho),
            rho1: optional(p.rho1),
            rho2: optional(p.rho2),
            m1: optional(p.m1),
            m2: optional(p.m2),
            nu: optional(p.nu),
            l: optional(p.l),
            k_env,
            mu: optional(p.mu),
            sigma: optional(p.sigma),
            k: optional(p.k),
        };
        let (report_out, holds_out) = (out_ptr(report, "report")?, out_ptr(holds, "holds")?);
        let r = theorems::check(pb, id, &params)?;
        *report_out = CString::new(r.to_string()).map_err(|_| invalid("NUL in report"))?.into_raw();
        *holds_out = c_int::from(r.holds());
        Ok(())
    })
}

/// Parameters with every field absent.
#[no_mangle]
pub extern "C" fn fbvp_theorem_params_empty() -> FbvpTheoremParams {
    FbvpTheoremParams {
        rho: f64::NAN,
        rho1: f64::NAN,
        rho2: f64::NAN,
        m1: f64::NAN,
        m2: f64::NAN,
        nu: f64::NAN,
        l: f64::NAN,
        mu: f64::NAN,
        sigma: f64::NAN,
        k: f64::NAN,
        k_env: ptr::null(),
    }
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must be null or a string from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn fbvp_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Solves by Picard iteration from u ≡ 0. Non-convergence is not an error;
/// query [`fbvp_solution_converged`].
///
/// # Safety
/// `problem` must be null or a live handle; `out` must be null or valid for
/// writes.
#[no_mangle]
pub unsafe extern "C" fn fbvp_solve(problem: *const FbvpProblem, out: *mut *mut FbvpSolution) -> FbvpStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let inner = fracbvp::solver::solve(&handle(problem, "problem")?.inner)?;
        *out = Box::into_raw(Box::new(FbvpSolution { inner }));
        Ok(())
    })
}

/// Releases a solution. Null is ignored.
///
/// # Safety
/// `solution` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn fbvp_solution_free(solution: *mut FbvpSolution) {
    if !solution.is_null() {
        drop(Box::from_raw(solution));
    }
}

/// Number of grid nodes, or 0 for null.
///
/// # Safety
/// `solution` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn fbvp_solution_len(solution: *const FbvpSolution) -> usize {
    solution.as_ref().map_or(0, |s| s.inner.solution.nodes().len())
}

/// 1 when both the final gap and the residual met the tolerance.
///
/// # Safety
/// `solution` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn fbvp_solution_converged(solution: *const FbvpSolution) -> c_int {
    solution.as_ref().map_or(0, |s| c_int::from(s.inner.converged))
}

/// Iterations performed, or 0 for null.
///
/// # Safety
/// `solution` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn fbvp_solution_iterations(solution: *const FbvpSolution) -> usize {
    solution.as_ref().map_or(0, |s| s.inner.iterations)
}

/// sup |u - Au| at the returned solution, or NaN for null.
///
/// # Safety
/// `solution` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn fbvp_solution_residual(solution: *const FbvpSolution) -> f64 {
    solution.as_ref().map_or(f64::NAN, |s| s.inner.residual)
}

/// Copies nodes and values into caller buffers of length `len`.
///
/// # Safety
/// `t` and `u` must be null or valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn fbvp_solution_copy(
    solution: *const FbvpSolution,
    t: *mut f64,
    u: *mut f64,
    len: usize,
) -> FbvpStatus {
    guard(|| {
        let g = &handle(solution, "solution")?.inner.solution;
        let n = g.nodes().len();
        if len < n {
            return Err(Fail(FbvpStatus::BufferTooSmall, format!("buffers hold {len} values, need {n}")));
        }
        if t.is_null() || u.is_null() {
            return Err(Fail(FbvpStatus::NullPointer, "output buffer is null".into()));
        }
        ptr::copy_nonoverlapping(g.nodes().as_ptr(), t, n);
        ptr::copy_nonoverlapping(g.values().as_ptr(), u, n);
        Ok(())
    })
}

/// Interpolated solution value at `t` ∈ [0, 1].
///
/// # Safety
/// `solution` must be null or a live handle; `out` must be null or valid for
/// writes.
#[no_mangle]
pub unsafe extern "C" fn fbvp_solution_eval(solution: *const FbvpSolution, t: f64, out: *mut f64) -> FbvpStatus {
    guard(|| {
        let g = &handle(solution, "solution")?.inner.solution;
        if !(0.0..=1.0).contains(&t) {
            return Err(invalid(format!("t must lie in [0, 1], got {t}")));
        }
        *out_ptr(out, "out")? = g.eval(t);
        Ok(())
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn panics_become_a_status() {
        let status = guard(|| panic!("boom"));
        assert_eq!(status, FbvpStatus::Panic);
        assert!(!fbvp_last_error_message().is_null());
        assert_eq!(guard(|| Ok(())), FbvpStatus::Ok);
        assert!(fbvp_last_error_message().is_null());
    }

    #[test]
    fn interior_nul_is_sanitised() {
        set_error("a\0b");
        let msg = unsafe { CStr::from_ptr(fbvp_last_error_message()) };
        assert_eq!(msg.to_str().unwrap(), "a b");
    }

    #[test]
    fn nan_means_absent() {
        assert_eq!(optional(f64::NAN), None);
        assert_eq!(optional(0.0), Some(0.0));
        let p = fbvp_theorem_params_empty();
        assert!(p.rho.is_nan() && p.k_env.is_null());
    }
}
