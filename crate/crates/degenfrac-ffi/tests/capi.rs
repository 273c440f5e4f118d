//! Exercises the C entry points exactly as a foreign caller would: through
//! raw pointers, status codes, and the thread-local error message.

use degenfrac_ffi::*;
use std::ffi::{CStr, CString};
use std::ptr;

fn last_error() -> String {
    unsafe { CStr::from_ptr(df_last_error_message()) }
        .to_str()
        .unwrap()
        .to_string()
}

#[test]
fn version_is_a_nonempty_static_string() {
    let v = unsafe { CStr::from_ptr(df_version()) }.to_str().unwrap();
    assert!(!v.is_empty());
    assert!(v.split('.').count() >= 2);
}

#[test]
fn special_function_values_and_rejections() {
    let mut value = 0.0;
    let status = unsafe { df_kilbas_saigo(0.5, 2.0, 1.0, -5.0, &mut value) };
    assert_eq!(status, DfStatus::Ok);
    assert!((value - 0.12533708631263858).abs() < 1e-8);

    let status = unsafe { df_mittag_leffler(1.0, -1.0, &mut value) };
    assert_eq!(status, DfStatus::Ok);
    assert!((value - (-1.0f64).exp()).abs() < 1e-12);

    let status = unsafe { df_kilbas_saigo(0.5, 2.0, 1.0, 5.0, &mut value) };
    assert_eq!(status, DfStatus::InvalidArgument);
    assert!(!last_error().is_empty());

    let status = unsafe { df_kilbas_saigo(1.5, 2.0, 1.0, -5.0, &mut value) };
    assert_eq!(status, DfStatus::InvalidArgument);
}

#[test]
fn relaxation_march_matches_the_closed_form_endpoint() {
    let steps = 1024;
    let mut out = vec![0.0; steps + 1];
    let lambda = std::f64::consts::PI * std::f64::consts::PI;
    let status =
        unsafe { df_caputo_relax(lambda, 0.5, 0.0, 1.0, steps, 4.0, out.as_mut_ptr()) };
    assert_eq!(status, DfStatus::Ok);
    assert_eq!(out[0], 1.0);
    let want = 0.056875338719078234;
    assert!(
        (out[steps] - want).abs() < 1e-3 * want,
        "endpoint {} vs {want}",
        out[steps]
    );

    let status = unsafe { df_caputo_relax(lambda, 1.5, 0.0, 1.0, 8, 1.0, out.as_mut_ptr()) };
    assert_eq!(status, DfStatus::InvalidArgument);
}

fn problem_json() -> CString {
    CString::new(
        r#"{
            "alpha": 0.5, "beta": 1.0, "s": 1,
            "K": "1", "p": ["0"], "phi": "sin(pi*y)",
            "grid": {"ny": 60, "nx": 64},
            "modes": 3, "tolerance": 1e-3, "output": "unused"
        }"#,
    )
    .unwrap()
}

#[test]
fn problem_handles_carry_the_full_pipeline() {
    let json = problem_json();
    let mut problem: *mut DfProblem = ptr::null_mut();
    let status = unsafe { df_problem_from_json(json.as_ptr(), &mut problem) };
    assert_eq!(status, DfStatus::Ok);
    assert!(!problem.is_null());
    assert_eq!(unsafe { df_problem_ny(problem) }, 60);

    let mut lambdas = [0.0; 2];
    let status = unsafe { df_problem_eigs(problem, 2, lambdas.as_mut_ptr()) };
    assert_eq!(status, DfStatus::Ok);
    let pi2 = std::f64::consts::PI * std::f64::consts::PI;
    assert!((lambdas[0] - pi2).abs() < 1e-2 * pi2);
    assert!((lambdas[1] - 4.0 * pi2).abs() < 1e-2 * 4.0 * pi2);

    let mut solution: *mut DfSolution = ptr::null_mut();
    let status = unsafe { df_problem_solve(problem, &mut solution) };
    assert_eq!(status, DfStatus::Ok);
    let nx = unsafe { df_solution_nx(solution) };
    let ny = unsafe { df_solution_ny(solution) };
    assert_eq!(nx, 65);
    assert_eq!(ny, 60);

    let mut xs = vec![0.0; nx];
    let mut ys = vec![0.0; ny];
    assert_eq!(unsafe { df_solution_xs(solution, xs.as_mut_ptr()) }, DfStatus::Ok);
    assert_eq!(unsafe { df_solution_ys(solution, ys.as_mut_ptr()) }, DfStatus::Ok);
    assert_eq!(xs[0], 0.0);
    assert!(xs.windows(2).all(|w| w[1] > w[0]));

    // the first time level reproduces the configured data
    for (iy, &y) in ys.iter().enumerate() {
        let got = unsafe { df_solution_value(solution, 0, iy) };
        assert!((got - (std::f64::consts::PI * y).sin()).abs() < 1e-6);
    }
    // and the solution decays in time at the midpoint
    let mid = ny / 2;
    let early = unsafe { df_solution_value(solution, 0, mid) };
    let late = unsafe { df_solution_value(solution, nx - 1, mid) };
    assert!(late < early);
    assert!(late > 0.0);

    let computed = unsafe { df_solution_modes_computed(solution) };
    assert_eq!(computed, 3);
    assert!(unsafe { df_solution_modes_used(solution) } >= 1);
    let mut spectrum = vec![0.0; computed];
    assert_eq!(
        unsafe { df_solution_eigenvalues(solution, spectrum.as_mut_ptr()) },
        DfStatus::Ok
    );
    assert_eq!(spectrum[0], lambdas[0]);
    assert!(unsafe { df_solution_truncation_bound(solution) } >= 0.0);
    assert!(unsafe { df_solution_residual_max_rel(solution) } < 5e-3);

    unsafe { df_solution_free(solution) };
    unsafe { df_problem_free(problem) };
}

#[test]
fn null_pointers_and_bad_text_are_rejected() {
    let mut problem: *mut DfProblem = ptr::null_mut();
    let status = unsafe { df_problem_from_json(ptr::null(), &mut problem) };
    assert_eq!(status, DfStatus::NullPointer);

    let bad = CString::new("{ not json").unwrap();
    let status = unsafe { df_problem_from_json(bad.as_ptr(), &mut problem) };
    assert_eq!(status, DfStatus::InvalidArgument);
    assert!(!last_error().is_empty());

    let unknown = CString::new(r#"{"alpha": 0.5, "surprise": 1}"#).unwrap();
    let status = unsafe { df_problem_from_json(unknown.as_ptr(), &mut problem) };
    assert_eq!(status, DfStatus::InvalidArgument);

    let status = unsafe { df_kilbas_saigo(0.5, 1.0, 0.0, -1.0, ptr::null_mut()) };
    assert_eq!(status, DfStatus::NullPointer);

    assert!(unsafe { df_solution_value(ptr::null(), 0, 0) }.is_nan());
    assert_eq!(unsafe { df_solution_nx(ptr::null()) }, 0);
    unsafe { df_problem_free(ptr::null_mut()) };
    unsafe { df_solution_free(ptr::null_mut()) };
}

#[test]
fn requesting_more_modes_than_the_grid_resolves_fails_cleanly() {
    let json = problem_json();
    let mut problem: *mut DfProblem = ptr::null_mut();
    assert_eq!(
        unsafe { df_problem_from_json(json.as_ptr(), &mut problem) },
        DfStatus::Ok
    );
    let mut lambdas = vec![0.0; 40];
    let status = unsafe { df_problem_eigs(problem, 40, lambdas.as_mut_ptr()) };
    assert_eq!(status, DfStatus::InvalidArgument);
    assert!(last_error().contains("resolves only"));
    unsafe { df_problem_free(problem) };
}
