//! C ABI over the `subdiff` solvers.
//!
//! Problems and solutions are opaque handles created and released through
//! this API. Every entry point returns a [`SubdiffStatus`]; on failure the
//! message is kept per thread and read back with [`subdiff_last_error`].
//! Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use subdiff::analysis::{max_error, stability_report, DEFAULT_SWEEP_POINTS};
use subdiff::fracweights::{gl_weights, shifted_weights};
use subdiff::problem::{ProblemFile, ProblemSpec};
use subdiff::solver::{solve_with_ghosts, GhostPolicy, SchemeKind, SolutionHistory};
use subdiff::Error;

/// Result codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SubdiffStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    GridTooCoarse = 3,
    Singular = 4,
    InvalidProblem = 5,
    MissingExact = 6,
    Io = 7,
    BufferTooSmall = 8,
    Panic = 9,
}

/// Values accepted for `scheme` arguments.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SubdiffScheme {
    Compact6 = 0,
    Compact8 = 1,
}

/// Values accepted for `ghosts` arguments.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SubdiffGhosts {
    Extrapolate = 0,
    Exact = 1,
    Zero = 2,
}

/// Opaque problem handle.
pub struct SubdiffProblem {
    spec: ProblemSpec,
}

/// Opaque solution handle.
pub struct SubdiffSolution {
    history: SolutionHistory,
}

/// Stability verdict; `max_stable_tau` is `INFINITY` when every step is admissible.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct SubdiffStability {
    pub condition_value: f64,
    pub bound: f64,
    pub satisfied: bool,
    pub unconditional: bool,
    pub max_stable_tau: f64,
    pub worst_ratio: f64,
    pub p_nonnegative: bool,
    pub min_eigenvalue: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

struct Failure(SubdiffStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::InvalidArgument { .. } | Error::TooShort { .. } | Error::WeightsTooShort { .. } => {
                SubdiffStatus::InvalidArgument
            }
            Error::GridTooCoarse { .. } => SubdiffStatus::GridTooCoarse,
            Error::Singular { .. } => SubdiffStatus::Singular,
            Error::Invalid(_) | Error::Expression(_) => SubdiffStatus::InvalidProblem,
            Error::MissingExact => SubdiffStatus::MissingExact,
            Error::Io(_) => SubdiffStatus::Io,
        };
        Failure(status, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(SubdiffStatus::NullPointer, format!("`{what}` is null"))
}

fn guard<F: FnOnce() -> Result<(), Failure>>(f: F) -> SubdiffStatus {
    let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
        let msg = p
            .downcast_ref::<&str>()
            .map(|s| s.to_string())
            .or_else(|| p.downcast_ref::<String>().cloned())
            .unwrap_or_else(|| "panic".into());
        Err(Failure(SubdiffStatus::Panic, msg))
    });
    match outcome {
        Ok(()) => {
            LAST_ERROR.with(|e| e.borrow_mut().clear());
            SubdiffStatus::Ok
        }
        Err(Failure(status, msg)) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = msg);
            status
        }
    }
}

fn scheme_of(v: u32) -> Result<SchemeKind, Failure> {
    match v {
        0 => Ok(SchemeKind::Compact6),
        1 => Ok(SchemeKind::Compact8),
        _ => Err(Failure(SubdiffStatus::InvalidArgument, format!("unknown scheme {v}"))),
    }
}

fn ghosts_of(v: u32) -> Result<GhostPolicy, Failure> {
    match v {
        0 => Ok(GhostPolicy::Extrapolate),
        1 => Ok(GhostPolicy::Exact),
        2 => Ok(GhostPolicy::Zero),
        _ => Err(Failure(SubdiffStatus::InvalidArgument, format!("unknown ghost policy {v}"))),
    }
}

/// Copies the calling thread's last error message into `buf` (NUL terminated)
/// and returns the size needed including the terminator. With a null `buf`
/// or `len = 0` nothing is written.
///
/// # Safety
/// `buf` must be null or valid for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn subdiff_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        let needed = msg.len() + 1;
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            ptr::copy_nonoverlapping(msg.as_ptr(), buf as *mut u8, n);
            *buf.add(n) = 0;
        }
        needed
    })
}

/// Creates the built-in manufactured problem.
///
/// # Safety
/// `out` must be null or valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn subdiff_problem_manufactured(
    alpha: f64,
    beta: f64,
    out: *mut *mut SubdiffProblem,
) -> SubdiffStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let spec = subdiff::problem::validate(ProblemSpec::manufactured(alpha, beta))?;
        *out = Box::into_raw(Box::new(SubdiffProblem { spec }));
        Ok(())
    })
}

/// Compiles a problem from its JSON description.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn subdiff_problem_from_json(
    json: *const c_char,
    out: *mut *mut SubdiffProblem,
) -> SubdiffStatus {
    guard(|| {
        if json.is_null() {
            return Err(null("json"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let text = CStr::from_ptr(json)
            .to_str()
            .map_err(|_| Failure(SubdiffStatus::InvalidArgument, "json is not UTF-8".into()))?;
        let spec = subdiff::problem::validate(ProblemFile::from_json(text)?.compile()?)?;
        *out = Box::into_raw(Box::new(SubdiffProblem { spec }));
        Ok(())
    })
}

/// Releases a problem. Null is ignored.
///
/// # Safety
/// `problem` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn subdiff_problem_free(problem: *mut SubdiffProblem) {
    if !problem.is_null() {
        drop(Box::from_raw(problem));
    }
}

/// Solves `problem` with `intervals` cells in space and `steps` in time.
///
/// # Safety
/// `problem` must be a live handle; `out` valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn subdiff_solve(
    problem: *const SubdiffProblem,
    scheme: u32,
    ghosts: u32,
    intervals: usize,
    steps: usize,
    out: *mut *mut SubdiffSolution,
) -> SubdiffStatus {
    guard(|| {
        let p = problem.as_ref().ok_or_else(|| null("problem"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let history = solve_with_ghosts(&p.spec, scheme_of(scheme)?, ghosts_of(ghosts)?, intervals, steps)?;
        *out = Box::into_raw(Box::new(SubdiffSolution { history }));
        Ok(())
    })
}

/// Number of stored time levels (`steps + 1`); 0 for null.
///
/// # Safety
/// `solution` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn subdiff_solution_levels(solution: *const SubdiffSolution) -> usize {
    solution.as_ref().map_or(0, |s| s.history.levels.len())
}

/// Grid points per level (`intervals + 1`); 0 for null.
///
/// # Safety
/// `solution` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn subdiff_solution_points(solution: *const SubdiffSolution) -> usize {
    solution.as_ref().map_or(0, |s| s.history.intervals + 1)
}

/// Copies level `k` into `buf`, which must hold `subdiff_solution_points` values.
///
/// # Safety
/// `solution` must be a live handle; `buf` valid for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn subdiff_solution_level(
    solution: *const SubdiffSolution,
    k: usize,
    buf: *mut f64,
    len: usize,
) -> SubdiffStatus {
    guard(|| {
        let s = solution.as_ref().ok_or_else(|| null("solution"))?;
        if buf.is_null() {
            return Err(null("buf"));
        }
        let level = s.history.levels.get(k).ok_or_else(|| {
            Failure(
                SubdiffStatus::InvalidArgument,
                format!("level {k} out of range (have {})", s.history.levels.len()),
            )
        })?;
        if len < level.len() {
            return Err(Failure(
                SubdiffStatus::BufferTooSmall,
                format!("buffer holds {len} values, level has {}", level.len()),
            ));
        }
        ptr::copy_nonoverlapping(level.as_ptr(), buf, level.len());
        Ok(())
    })
}

/// Maximum interior error against the problem's exact solution.
///
/// # Safety
/// Handles must be live; `out` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn subdiff_solution_max_error(
    solution: *const SubdiffSolution,
    problem: *const SubdiffProblem,
    out: *mut f64,
) -> SubdiffStatus {
    guard(|| {
        let s = solution.as_ref().ok_or_else(|| null("solution"))?;
        let p = problem.as_ref().ok_or_else(|| null("problem"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let exact = p.spec.exact.as_ref().ok_or(Error::MissingExact)?;
        *out = max_error(&s.history, &**exact);
        Ok(())
    })
}

/// Releases a solution. Null is ignored.
///
/// # Safety
/// `solution` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn subdiff_solution_free(solution: *mut SubdiffSolution) {
    if !solution.is_null() {
        drop(Box::from_raw(solution));
    }
}

unsafe fn fill(values: Vec<f64>, buf: *mut f64, len: usize) -> Result<(), Failure> {
    if buf.is_null() {
        return Err(null("buf"));
    }
    if len < values.len() {
        return Err(Failure(
            SubdiffStatus::BufferTooSmall,
            format!("buffer holds {len} values, need {}", values.len()),
        ));
    }
    ptr::copy_nonoverlapping(values.as_ptr(), buf, values.len());
    Ok(())
}

/// Writes the binomial weights `w_0..w_n` into `buf` (`n + 1` values).
///
/// # Safety
/// `buf` must be valid for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn subdiff_gl_weights(order: f64, n: usize, buf: *mut f64, len: usize) -> SubdiffStatus {
    guard(|| fill(gl_weights(order, n)?, buf, len))
}

/// Writes the shifted weights `g_0..g_n` into `buf` (`n + 1` values).
///
/// # Safety
/// `buf` must be valid for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn subdiff_shifted_weights(order: f64, n: usize, buf: *mut f64, len: usize) -> SubdiffStatus {
    guard(|| fill(shifted_weights(order, n)?, buf, len))
}

/// Stability condition, amplification sweep (1001 samples) and eigenvalue minimum.
///
/// # Safety
/// `out` must be valid for a write.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn subdiff_stability_check(
    scheme: u32,
    alpha: f64,
    beta: f64,
    a_coef: f64,
    b_coef: f64,
    tau: f64,
    h: f64,
    out: *mut SubdiffStability,
) -> SubdiffStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let r = stability_report(scheme_of(scheme)?, alpha, beta, a_coef, b_coef, tau, h, DEFAULT_SWEEP_POINTS)?;
        *out = SubdiffStability {
            condition_value: r.condition_value,
            bound: r.bound,
            satisfied: r.satisfied,
            unconditional: r.unconditional,
            max_stable_tau: r.max_stable_tau.unwrap_or(f64::INFINITY),
            worst_ratio: r.worst_ratio,
            p_nonnegative: r.p_nonnegative,
            min_eigenvalue: r.min_eigenvalue,
        };
        Ok(())
    })
}
