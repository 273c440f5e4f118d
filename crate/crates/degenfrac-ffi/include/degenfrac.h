/* C interface to the degenfrac solver. Generated; do not edit by hand. */

#ifndef DEGENFRAC_H
#define DEGENFRAC_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every fallible call.
 */
typedef enum DfStatus {
  /**
   * The call succeeded.
   */
  DF_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  DF_STATUS_NULL_POINTER = 1,
  /**
   * Arguments or configuration text were rejected before any numerics ran.
   */
  DF_STATUS_INVALID_ARGUMENT = 2,
  /**
   * The computation itself failed (overflow, nonconvergence, internal panic).
   */
  DF_STATUS_NUMERIC_FAILURE = 3,
} DfStatus;

/**
 * A validated problem description, ready to solve.
 */
typedef struct DfProblem DfProblem;

/**
 * A solved field with its diagnostics.
 */
typedef struct DfSolution DfSolution;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static nul-terminated string.
 */
const char *df_version(void);

/**
 * Message for the most recent failure on the calling thread.
 *
 * The pointer stays valid until the next failing `df_` call on the same
 * thread. Returns an empty string if nothing has failed yet.
 */
const char *df_last_error_message(void);

/**
 * Evaluate the three-parameter relaxation special function at `z`.
 *
 * # Safety
 * `out` must point to a writable `double`.
 */
enum DfStatus df_kilbas_saigo(double alpha, double m, double l, double z, double *out);

/**
 * Evaluate the one-parameter relaxation special function at `z`.
 *
 * # Safety
 * `out` must point to a writable `double`.
 */
enum DfStatus df_mittag_leffler(double alpha, double z, double *out);

/**
 * March the scalar relaxation equation on a graded grid and write the
 * trajectory, including the unit initial value at the origin.
 *
 * `out` receives `steps + 1` values at the grid nodes `x_max * (j/steps)^grading`.
 *
 * # Safety
 * `out` must point to a writable array of at least `steps + 1` doubles.
 */
enum DfStatus df_caputo_relax(double lambda,
                              double alpha,
                              double beta,
                              double x_max,
                              size_t steps,
                              double grading,
                              double *out);

/**
 * Parse and validate a JSON problem description.
 *
 * On success `*out` owns the new handle; release it with [`df_problem_free`].
 *
 * # Safety
 * `json` must be a valid nul-terminated string and `out` a writable pointer slot.
 */
enum DfStatus df_problem_from_json(const char *json, struct DfProblem **out);

/**
 * Release a problem handle. A null handle is ignored.
 *
 * # Safety
 * `problem` must be null or a handle from [`df_problem_from_json`] that has
 * not been freed already.
 */
void df_problem_free(struct DfProblem *problem);

/**
 * Number of interior cross-section nodes the problem discretizes.
 *
 * # Safety
 * `problem` must be a live handle from [`df_problem_from_json`].
 */
size_t df_problem_ny(const struct DfProblem *problem);

/**
 * Compute the lowest `n_modes` eigenvalues of the problem's spatial operator.
 *
 * # Safety
 * `problem` must be a live handle and `out` a writable array of at least
 * `n_modes` doubles.
 */
enum DfStatus df_problem_eigs(const struct DfProblem *problem, size_t n_modes, double *out);

/**
 * Run the full solve: eigenmodes, data expansion, mode selection against
 * the configured tolerance, time marching, and a residual audit.
 *
 * On success `*out` owns the new handle; release it with [`df_solution_free`].
 *
 * # Safety
 * `problem` must be a live handle and `out` a writable pointer slot.
 */
enum DfStatus df_problem_solve(const struct DfProblem *problem, struct DfSolution **out);

/**
 * Release a solution handle. A null handle is ignored.
 *
 * # Safety
 * `solution` must be null or a handle from [`df_problem_solve`] that has
 * not been freed already.
 */
void df_solution_free(struct DfSolution *solution);

/**
 * Number of time levels in the solved field (including the initial one).
 *
 * # Safety
 * `solution` must be null or a live handle from [`df_problem_solve`].
 */
size_t df_solution_nx(const struct DfSolution *solution);

/**
 * Number of cross-section nodes in the solved field.
 *
 * # Safety
 * `solution` must be null or a live handle from [`df_problem_solve`].
 */
size_t df_solution_ny(const struct DfSolution *solution);

/**
 * Field value at time index `ix` and cross-section index `iy`.
 * Out-of-range indices return NaN.
 *
 * # Safety
 * `solution` must be null or a live handle from [`df_problem_solve`].
 */
double df_solution_value(const struct DfSolution *solution, size_t ix, size_t iy);

/**
 * Copy the time coordinates into `out`.
 *
 * # Safety
 * `solution` must be a live handle and `out` a writable array of at least
 * [`df_solution_nx`] doubles.
 */
enum DfStatus df_solution_xs(const struct DfSolution *solution, double *out);

/**
 * Copy the cross-section coordinates into `out`.
 *
 * # Safety
 * `solution` must be a live handle and `out` a writable array of at least
 * [`df_solution_ny`] doubles.
 */
enum DfStatus df_solution_ys(const struct DfSolution *solution, double *out);

/**
 * Number of eigenmodes actually computed for this solution.
 *
 * # Safety
 * `solution` must be null or a live handle from [`df_problem_solve`].
 */
size_t df_solution_modes_computed(const struct DfSolution *solution);

/**
 * Number of eigenmodes the truncated expansion kept.
 *
 * # Safety
 * `solution` must be null or a live handle from [`df_problem_solve`].
 */
size_t df_solution_modes_used(const struct DfSolution *solution);

/**
 * Copy the computed eigenvalues (ascending) into `out`.
 *
 * # Safety
 * `solution` must be a live handle and `out` a writable array of at least
 * [`df_solution_modes_computed`] doubles.
 */
enum DfStatus df_solution_eigenvalues(const struct DfSolution *solution, double *out);

/**
 * Energy-weighted bound on the truncation error of the kept expansion.
 *
 * # Safety
 * `solution` must be null or a live handle from [`df_problem_solve`].
 */
double df_solution_truncation_bound(const struct DfSolution *solution);

/**
 * Largest relative residual of the assembled field in the discrete equation.
 *
 * # Safety
 * `solution` must be null or a live handle from [`df_problem_solve`].
 */
double df_solution_residual_max_rel(const struct DfSolution *solution);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DEGENFRAC_H */
