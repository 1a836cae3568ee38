#ifndef FRACBVP_H
#define FRACBVP_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>
#include <stddef.h>

/**
 * Result codes shared by every entry point.
 */
typedef enum FbvpStatus {
  FBVP_STATUS_OK = 0,
  FBVP_STATUS_NULL_POINTER = 1,
  FBVP_STATUS_INVALID_ARGUMENT = 2,
  FBVP_STATUS_PARSE_ERROR = 3,
  FBVP_STATUS_DOMAIN_ERROR = 4,
  FBVP_STATUS_NUMERIC_ERROR = 5,
  FBVP_STATUS_BUFFER_TOO_SMALL = 6,
  FBVP_STATUS_PANIC = 7,
} FbvpStatus;

/**
 * A boundary value problem with its numerical settings.
 */
typedef struct FbvpProblem FbvpProblem;

/**
 * The outcome of a solve: grid values plus convergence data.
 */
typedef struct FbvpSolution FbvpSolution;

/**
 * Inputs for [`fbvp_check_theorem`]. NaN marks a value as absent; `k_env`
 * may be null.
 */
typedef struct FbvpTheoremParams {
  double rho;
  double rho1;
  double rho2;
  double m1;
  double m2;
  double nu;
  double l;
  double mu;
  double sigma;
  double k;
  const char *k_env;
} FbvpTheoremParams;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread, or null. The pointer stays
 * valid until the next call into this library on the same thread.
 */
const char *fbvp_last_error_message(void);

/**
 * Γ(x).
 *
 * # Safety
 * `out` must be null or valid for writes.
 */
enum FbvpStatus fbvp_gamma(double x, double *out);

/**
 * B(p, q).
 *
 * # Safety
 * `out` must be null or valid for writes.
 */
enum FbvpStatus fbvp_beta(double p, double q, double *out);

/**
 * Builds a problem from orders and expression strings.
 *
 * # Safety
 * `a` and `f` must be null or NUL-terminated; `out` must be null or valid
 * for writes.
 */
enum FbvpStatus fbvp_problem_new(double alpha,
                                 double eta,
                                 double p,
                                 const char *a,
                                 const char *f,
                                 struct FbvpProblem **out);

/**
 * Builds a problem from problem-file text.
 *
 * # Safety
 * `text` must be null or NUL-terminated; `out` must be null or valid for
 * writes.
 */
enum FbvpStatus fbvp_problem_from_toml(const char *text, struct FbvpProblem **out);

/**
 * Canonical problem-file text for `problem`.
 *
 * # Safety
 * `problem` must be null or a live handle; `out` must be null or valid for
 * writes. Free the string with [`fbvp_string_free`].
 */
enum FbvpStatus fbvp_problem_to_toml(const struct FbvpProblem *problem, char **out);

/**
 * Overrides the panel count of the solution grid.
 *
 * # Safety
 * `problem` must be null or a live handle.
 */
enum FbvpStatus fbvp_problem_set_panels(struct FbvpProblem *problem, size_t panels);

/**
 * Overrides the solver tolerance, iteration cap and damping.
 *
 * # Safety
 * `problem` must be null or a live handle.
 */
enum FbvpStatus fbvp_problem_set_solver(struct FbvpProblem *problem,
                                        double tol,
                                        size_t max_iter,
                                        double damping);

/**
 * Releases a problem. Null is ignored.
 *
 * # Safety
 * `problem` must be null or a handle not yet freed.
 */
void fbvp_problem_free(struct FbvpProblem *problem);

/**
 * Λ₁ of the problem.
 *
 * # Safety
 * `problem` must be null or a live handle; `out` must be null or valid for
 * writes.
 */
enum FbvpStatus fbvp_lambda1(const struct FbvpProblem *problem, double *out);

/**
 * Λ₂ of the problem for cone parameter `rho`.
 *
 * # Safety
 * `problem` must be null or a live handle; `out` must be null or valid for
 * writes.
 */
enum FbvpStatus fbvp_lambda2(const struct FbvpProblem *problem, double rho, double *out);

/**
 * Checks theorem `theorem` ("3.1" to "3.5"). Writes the text report to
 * `report` and 1 or 0 to `holds`.
 *
 * # Safety
 * Pointers must be null or valid; `theorem` and `params.k_env` must be
 * NUL-terminated when non-null. Free the report with [`fbvp_string_free`].
 */
enum FbvpStatus fbvp_check_theorem(const struct FbvpProblem *problem,
                                   const char *theorem,
                                   const struct FbvpTheoremParams *params,
                                   char **report,
                                   int *holds);

/**
 * Parameters with every field absent.
 */
struct FbvpTheoremParams fbvp_theorem_params_empty(void);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must be null or a string from this library not yet freed.
 */
void fbvp_string_free(char *s);

/**
 * Solves by Picard iteration from u ≡ 0. Non-convergence is not an error;
 * query [`fbvp_solution_converged`].
 *
 * # Safety
 * `problem` must be null or a live handle; `out` must be null or valid for
 * writes.
 */
enum FbvpStatus fbvp_solve(const struct FbvpProblem *problem, struct FbvpSolution **out);

/**
 * Releases a solution. Null is ignored.
 *
 * # Safety
 * `solution` must be null or a handle not yet freed.
 */
void fbvp_solution_free(struct FbvpSolution *solution);

/**
 * Number of grid nodes, or 0 for null.
 *
 * # Safety
 * `solution` must be null or a live handle.
 */
size_t fbvp_solution_len(const struct FbvpSolution *solution);

/**
 * 1 when both the final gap and the residual met the tolerance.
 *
 * # Safety
 * `solution` must be null or a live handle.
 */
int fbvp_solution_converged(const struct FbvpSolution *solution);

/**
 * Iterations performed, or 0 for null.
 *
 * # Safety
 * `solution` must be null or a live handle.
 */
size_t fbvp_solution_iterations(const struct FbvpSolution *solution);

/**
 * sup |u - Au| at the returned solution, or NaN for null.
 *
 * # Safety
 * `solution` must be null or a live handle.
 */
double fbvp_solution_residual(const struct FbvpSolution *solution);

/**
 * Copies nodes and values into caller buffers of length `len`.
 *
 * # Safety
 * `t` and `u` must be null or valid for `len` writes.
 */
enum FbvpStatus fbvp_solution_copy(const struct FbvpSolution *solution,
                                   double *t,
                                   double *u,
                                   size_t len);

/**
 * Interpolated solution value at `t` ∈ [0, 1].
 *
 * # Safety
 * `solution` must be null or a live handle; `out` must be null or valid for
 * writes.
 */
enum FbvpStatus fbvp_solution_eval(const struct FbvpSolution *solution, double t, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FRACBVP_H */
