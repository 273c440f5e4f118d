//! C interface to the degenfrac solver.
//!
//! Every entry point is `df_`-prefixed and returns a [`DfStatus`]; outputs
//! go through pointer arguments. Problems and solved fields live behind
//! opaque handles that the caller frees explicitly. On any non-zero status
//! the thread-local message from [`df_last_error_message`] describes what
//! went wrong. The generated header is committed at `include/degenfrac.h`
//! and regenerated by the build script when this file changes.
//!
//! Thread safety: handles are immutable after creation and may be shared
//! across threads; the error message is per-thread.

use degenfrac::config::{self, ParsedConfig};
use degenfrac::driver::{self, AppError, Solution};
use degenfrac::fode::caputo_l1_solve;
use degenfrac::grid::XGrid;
use degenfrac::specfn::{kilbas_saigo, mittag_leffler, KsParams, SpecFnError};
use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::fmt::Display;
use std::panic::{catch_unwind, AssertUnwindSafe};

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DfStatus {
    /// The call succeeded.
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// Arguments or configuration text were rejected before any numerics ran.
    InvalidArgument = 2,
    /// The computation itself failed (overflow, nonconvergence, internal panic).
    NumericFailure = 3,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: &str) {
    let clean: String = message.replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(clean).unwrap_or_default();
    });
}

fn fail(status: DfStatus, message: impl Display) -> DfStatus {
    set_error(&message.to_string());
    status
}

fn specfn_fail(err: SpecFnError) -> DfStatus {
    let status = match err {
        SpecFnError::Overflow(_) | SpecFnError::Nonconvergence(_) => DfStatus::NumericFailure,
        _ => DfStatus::InvalidArgument,
    };
    fail(status, err)
}

fn app_fail(err: AppError) -> DfStatus {
    let status = match err {
        AppError::Config(_) | AppError::Usage(_) => DfStatus::InvalidArgument,
        _ => DfStatus::NumericFailure,
    };
    fail(status, err)
}

// Panics must not unwind across the C boundary.
fn guard(body: impl FnOnce() -> DfStatus) -> DfStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(_) => fail(
            DfStatus::NumericFailure,
            "internal error: unexpected panic inside the solver",
        ),
    }
}

/// Library version as a static nul-terminated string.
#[no_mangle]
pub extern "C" fn df_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Message for the most recent failure on the calling thread.
///
/// The pointer stays valid until the next failing `df_` call on the same
/// thread. Returns an empty string if nothing has failed yet.
#[no_mangle]
pub extern "C" fn df_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Evaluate the three-parameter relaxation special function at `z`.
///
/// # Safety
/// `out` must point to a writable `double`.
#[no_mangle]
pub unsafe extern "C" fn df_kilbas_saigo(
    alpha: f64,
    m: f64,
    l: f64,
    z: f64,
    out: *mut f64,
) -> DfStatus {
    if out.is_null() {
        return fail(DfStatus::NullPointer, "out is null");
    }
    guard(|| {
        let params = match KsParams::new(alpha, m, l) {
            Ok(p) => p,
            Err(e) => return specfn_fail(e),
        };
        match kilbas_saigo(&params, z) {
            Ok(v) => {
                unsafe { *out = v };
                DfStatus::Ok
            }
            Err(e) => specfn_fail(e),
        }
    })
}

/// Evaluate the one-parameter relaxation special function at `z`.
///
/// # Safety
/// `out` must point to a writable `double`.
#[no_mangle]
pub unsafe extern "C" fn df_mittag_leffler(alpha: f64, z: f64, out: *mut f64) -> DfStatus {
    if out.is_null() {
        return fail(DfStatus::NullPointer, "out is null");
    }
    guard(|| match mittag_leffler(alpha, z) {
        Ok(v) => {
            unsafe { *out = v };
            DfStatus::Ok
        }
        Err(e) => specfn_fail(e),
    })
}

/// March the scalar relaxation equation on a graded grid and write the
/// trajectory, including the unit initial value at the origin.
///
/// `out` receives `steps + 1` values at the grid nodes `x_max * (j/steps)^grading`.
///
/// # Safety
/// `out` must point to a writable array of at least `steps + 1` doubles.
#[no_mangle]
pub unsafe extern "C" fn df_caputo_relax(
    lambda: f64,
    alpha: f64,
    beta: f64,
    x_max: f64,
    steps: usize,
    grading: f64,
    out: *mut f64,
) -> DfStatus {
    if out.is_null() {
        return fail(DfStatus::NullPointer, "out is null");
    }
    guard(|| {
        let xgrid = match XGrid::graded(x_max, steps, grading) {
            Ok(g) => g,
            Err(e) => return fail(DfStatus::InvalidArgument, e),
        };
        match caputo_l1_solve(lambda, alpha, beta, &xgrid, 1.0) {
            Ok(values) => {
                let slice = unsafe { std::slice::from_raw_parts_mut(out, values.len()) };
                slice.copy_from_slice(&values);
                DfStatus::Ok
            }
            Err(e) => fail(DfStatus::InvalidArgument, e),
        }
    })
}

/// A validated problem description, ready to solve.
pub struct DfProblem {
    cfg: ParsedConfig,
}

/// Parse and validate a JSON problem description.
///
/// On success `*out` owns the new handle; release it with [`df_problem_free`].
///
/// # Safety
/// `json` must be a valid nul-terminated string and `out` a writable pointer slot.
#[no_mangle]
pub unsafe extern "C" fn df_problem_from_json(
    json: *const c_char,
    out: *mut *mut DfProblem,
) -> DfStatus {
    if json.is_null() || out.is_null() {
        return fail(DfStatus::NullPointer, "json or out is null");
    }
    guard(|| {
        let text = match unsafe { CStr::from_ptr(json) }.to_str() {
            Ok(t) => t,
            Err(e) => return fail(DfStatus::InvalidArgument, format!("json is not UTF-8: {e}")),
        };
        match config::parse_str(text) {
            Ok(cfg) => {
                unsafe { *out = Box::into_raw(Box::new(DfProblem { cfg })) };
                DfStatus::Ok
            }
            Err(e) => fail(DfStatus::InvalidArgument, e),
        }
    })
}

/// Release a problem handle. A null handle is ignored.
///
/// # Safety
/// `problem` must be null or a handle from [`df_problem_from_json`] that has
/// not been freed already.
#[no_mangle]
pub unsafe extern "C" fn df_problem_free(problem: *mut DfProblem) {
    if !problem.is_null() {
        drop(unsafe { Box::from_raw(problem) });
    }
}

/// Number of interior cross-section nodes the problem discretizes.
///
/// # Safety
/// `problem` must be a live handle from [`df_problem_from_json`].
#[no_mangle]
pub unsafe extern "C" fn df_problem_ny(problem: *const DfProblem) -> usize {
    if problem.is_null() {
        return 0;
    }
    unsafe { &*problem }.cfg.raw.grid.ny
}

/// Compute the lowest `n_modes` eigenvalues of the problem's spatial operator.
///
/// # Safety
/// `problem` must be a live handle and `out` a writable array of at least
/// `n_modes` doubles.
#[no_mangle]
pub unsafe extern "C" fn df_problem_eigs(
    problem: *const DfProblem,
    n_modes: usize,
    out: *mut f64,
) -> DfStatus {
    if problem.is_null() || out.is_null() {
        return fail(DfStatus::NullPointer, "problem or out is null");
    }
    guard(|| {
        let cfg = &unsafe { &*problem }.cfg;
        match driver::eigs_parsed(cfg, Some(n_modes)) {
            Ok(summary) => {
                if summary.eigenvalues.len() < n_modes {
                    return fail(
                        DfStatus::InvalidArgument,
                        format!(
                            "grid with {} nodes resolves only {} modes, {n_modes} requested",
                            cfg.raw.grid.ny,
                            summary.eigenvalues.len()
                        ),
                    );
                }
                let slice = unsafe { std::slice::from_raw_parts_mut(out, n_modes) };
                slice.copy_from_slice(&summary.eigenvalues[..n_modes]);
                DfStatus::Ok
            }
            Err(e) => app_fail(e),
        }
    })
}

/// A solved field with its diagnostics.
pub struct DfSolution {
    solution: Solution,
}

/// Run the full solve: eigenmodes, data expansion, mode selection against
/// the configured tolerance, time marching, and a residual audit.
///
/// On success `*out` owns the new handle; release it with [`df_solution_free`].
///
/// # Safety
/// `problem` must be a live handle and `out` a writable pointer slot.
#[no_mangle]
pub unsafe extern "C" fn df_problem_solve(
    problem: *const DfProblem,
    out: *mut *mut DfSolution,
) -> DfStatus {
    if problem.is_null() || out.is_null() {
        return fail(DfStatus::NullPointer, "problem or out is null");
    }
    guard(|| {
        let cfg = &unsafe { &*problem }.cfg;
        match driver::solve_parsed(cfg) {
            Ok(solution) => {
                unsafe { *out = Box::into_raw(Box::new(DfSolution { solution })) };
                DfStatus::Ok
            }
            Err(e) => app_fail(e),
        }
    })
}

/// Release a solution handle. A null handle is ignored.
///
/// # Safety
/// `solution` must be null or a handle from [`df_problem_solve`] that has
/// not been freed already.
#[no_mangle]
pub unsafe extern "C" fn df_solution_free(solution: *mut DfSolution) {
    if !solution.is_null() {
        drop(unsafe { Box::from_raw(solution) });
    }
}

macro_rules! solution_ref {
    ($ptr:ident) => {
        if $ptr.is_null() {
            return Default::default();
        } else {
            &unsafe { &*$ptr }.solution
        }
    };
}

/// Number of time levels in the solved field (including the initial one).
///
/// # Safety
/// `solution` must be null or a live handle from [`df_problem_solve`].
#[no_mangle]
pub unsafe extern "C" fn df_solution_nx(solution: *const DfSolution) -> usize {
    let sol: &Solution = solution_ref!(solution);
    sol.field.xs.len()
}

/// Number of cross-section nodes in the solved field.
///
/// # Safety
/// `solution` must be null or a live handle from [`df_problem_solve`].
#[no_mangle]
pub unsafe extern "C" fn df_solution_ny(solution: *const DfSolution) -> usize {
    let sol: &Solution = solution_ref!(solution);
    sol.field.ys.len()
}

/// Field value at time index `ix` and cross-section index `iy`.
/// Out-of-range indices return NaN.
///
/// # Safety
/// `solution` must be null or a live handle from [`df_problem_solve`].
#[no_mangle]
pub unsafe extern "C" fn df_solution_value(
    solution: *const DfSolution,
    ix: usize,
    iy: usize,
) -> f64 {
    if solution.is_null() {
        return f64::NAN;
    }
    let sol = &unsafe { &*solution }.solution;
    if ix >= sol.field.xs.len() || iy >= sol.field.ys.len() {
        return f64::NAN;
    }
    sol.field.value(ix, iy)
}

/// Copy the time coordinates into `out`.
///
/// # Safety
/// `solution` must be a live handle and `out` a writable array of at least
/// [`df_solution_nx`] doubles.
#[no_mangle]
pub unsafe extern "C" fn df_solution_xs(solution: *const DfSolution, out: *mut f64) -> DfStatus {
    if solution.is_null() || out.is_null() {
        return fail(DfStatus::NullPointer, "solution or out is null");
    }
    let sol = &unsafe { &*solution }.solution;
    let slice = unsafe { std::slice::from_raw_parts_mut(out, sol.field.xs.len()) };
    slice.copy_from_slice(&sol.field.xs);
    DfStatus::Ok
}

/// Copy the cross-section coordinates into `out`.
///
/// # Safety
/// `solution` must be a live handle and `out` a writable array of at least
/// [`df_solution_ny`] doubles.
#[no_mangle]
pub unsafe extern "C" fn df_solution_ys(solution: *const DfSolution, out: *mut f64) -> DfStatus {
    if solution.is_null() || out.is_null() {
        return fail(DfStatus::NullPointer, "solution or out is null");
    }
    let sol = &unsafe { &*solution }.solution;
    let slice = unsafe { std::slice::from_raw_parts_mut(out, sol.field.ys.len()) };
    slice.copy_from_slice(&sol.field.ys);
    DfStatus::Ok
}

/// Number of eigenmodes actually computed for this solution.
///
/// # Safety
/// `solution` must be null or a live handle from [`df_problem_solve`].
#[no_mangle]
pub unsafe extern "C" fn df_solution_modes_computed(solution: *const DfSolution) -> usize {
    let sol: &Solution = solution_ref!(solution);
    sol.modes_computed
}

/// Number of eigenmodes the truncated expansion kept.
///
/// # Safety
/// `solution` must be null or a live handle from [`df_problem_solve`].
#[no_mangle]
pub unsafe extern "C" fn df_solution_modes_used(solution: *const DfSolution) -> usize {
    let sol: &Solution = solution_ref!(solution);
    sol.modes_used
}

/// Copy the computed eigenvalues (ascending) into `out`.
///
/// # Safety
/// `solution` must be a live handle and `out` a writable array of at least
/// [`df_solution_modes_computed`] doubles.
#[no_mangle]
pub unsafe extern "C" fn df_solution_eigenvalues(
    solution: *const DfSolution,
    out: *mut f64,
) -> DfStatus {
    if solution.is_null() || out.is_null() {
        return fail(DfStatus::NullPointer, "solution or out is null");
    }
    let sol = &unsafe { &*solution }.solution;
    let values = &sol.eigen.eigenvalues;
    let slice = unsafe { std::slice::from_raw_parts_mut(out, values.len()) };
    slice.copy_from_slice(values);
    DfStatus::Ok
}

/// Energy-weighted bound on the truncation error of the kept expansion.
///
/// # Safety
/// `solution` must be null or a live handle from [`df_problem_solve`].
#[no_mangle]
pub unsafe extern "C" fn df_solution_truncation_bound(solution: *const DfSolution) -> f64 {
    if solution.is_null() {
        return f64::NAN;
    }
    unsafe { &*solution }.solution.truncation_bound
}

/// Largest relative residual of the assembled field in the discrete equation.
///
/// # Safety
/// `solution` must be null or a live handle from [`df_problem_solve`].
#[no_mangle]
pub unsafe extern "C" fn df_solution_residual_max_rel(solution: *const DfSolution) -> f64 {
    if solution.is_null() {
        return f64::NAN;
    }
    unsafe { &*solution }.solution.residual.max_rel
}
