#ifndef SUBDIFF_H
#define SUBDIFF_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes.
 */
typedef enum SubdiffStatus {
  SUBDIFF_STATUS_OK = 0,
  SUBDIFF_STATUS_NULL_POINTER = 1,
  SUBDIFF_STATUS_INVALID_ARGUMENT = 2,
  SUBDIFF_STATUS_GRID_TOO_COARSE = 3,
  SUBDIFF_STATUS_SINGULAR = 4,
  SUBDIFF_STATUS_INVALID_PROBLEM = 5,
  SUBDIFF_STATUS_MISSING_EXACT = 6,
  SUBDIFF_STATUS_IO = 7,
  SUBDIFF_STATUS_BUFFER_TOO_SMALL = 8,
  SUBDIFF_STATUS_PANIC = 9,
} SubdiffStatus;

/**
 * Values accepted for `scheme` arguments.
 */
typedef enum SubdiffScheme {
  SUBDIFF_SCHEME_COMPACT6 = 0,
  SUBDIFF_SCHEME_COMPACT8 = 1,
} SubdiffScheme;

/**
 * Values accepted for `ghosts` arguments.
 */
typedef enum SubdiffGhosts {
  SUBDIFF_GHOSTS_EXTRAPOLATE = 0,
  SUBDIFF_GHOSTS_EXACT = 1,
  SUBDIFF_GHOSTS_ZERO = 2,
} SubdiffGhosts;

/**
 * Opaque problem handle.
 */
typedef struct SubdiffProblem SubdiffProblem;

/**
 * Opaque solution handle.
 */
typedef struct SubdiffSolution SubdiffSolution;

/**
 * Stability verdict; `max_stable_tau` is `INFINITY` when every step is admissible.
 */
typedef struct SubdiffStability {
  double condition_value;
  double bound;
  bool satisfied;
  bool unconditional;
  double max_stable_tau;
  double worst_ratio;
  bool p_nonnegative;
  double min_eigenvalue;
} SubdiffStability;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the calling thread's last error message into `buf` (NUL terminated)
 * and returns the size needed including the terminator. With a null `buf`
 * or `len = 0` nothing is written.
 *
 * # Safety
 * `buf` must be null or valid for `len` bytes.
 */
size_t subdiff_last_error(char *buf, size_t len);

/**
 * Creates the built-in manufactured problem.
 *
 * # Safety
 * `out` must be null or valid for a pointer write.
 */
enum SubdiffStatus subdiff_problem_manufactured(double alpha,
                                                double beta,
                                                struct SubdiffProblem **out);

/**
 * Compiles a problem from its JSON description.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` valid for a pointer write.
 */
enum SubdiffStatus subdiff_problem_from_json(const char *json, struct SubdiffProblem **out);

/**
 * Releases a problem. Null is ignored.
 *
 * # Safety
 * `problem` must come from this library and not be used afterwards.
 */
void subdiff_problem_free(struct SubdiffProblem *problem);

/**
 * Solves `problem` with `intervals` cells in space and `steps` in time.
 *
 * # Safety
 * `problem` must be a live handle; `out` valid for a pointer write.
 */
enum SubdiffStatus subdiff_solve(const struct SubdiffProblem *problem,
                                 uint32_t scheme,
                                 uint32_t ghosts,
                                 size_t intervals,
                                 size_t steps,
                                 struct SubdiffSolution **out);

/**
 * Number of stored time levels (`steps + 1`); 0 for null.
 *
 * # Safety
 * `solution` must be null or a live handle.
 */
size_t subdiff_solution_levels(const struct SubdiffSolution *solution);

/**
 * Grid points per level (`intervals + 1`); 0 for null.
 *
 * # Safety
 * `solution` must be null or a live handle.
 */
size_t subdiff_solution_points(const struct SubdiffSolution *solution);

/**
 * Copies level `k` into `buf`, which must hold `subdiff_solution_points` values.
 *
 * # Safety
 * `solution` must be a live handle; `buf` valid for `len` doubles.
 */
enum SubdiffStatus subdiff_solution_level(const struct SubdiffSolution *solution,
                                          size_t k,
                                          double *buf,
                                          size_t len);

/**
 * Maximum interior error against the problem's exact solution.
 *
 * # Safety
 * Handles must be live; `out` valid for a write.
 */
enum SubdiffStatus subdiff_solution_max_error(const struct SubdiffSolution *solution,
                                              const struct SubdiffProblem *problem,
                                              double *out);

/**
 * Releases a solution. Null is ignored.
 *
 * # Safety
 * `solution` must come from this library and not be used afterwards.
 */
void subdiff_solution_free(struct SubdiffSolution *solution);

/**
 * Writes the binomial weights `w_0..w_n` into `buf` (`n + 1` values).
 *
 * # Safety
 * `buf` must be valid for `len` doubles.
 */
enum SubdiffStatus subdiff_gl_weights(double order, size_t n, double *buf, size_t len);

/**
 * Writes the shifted weights `g_0..g_n` into `buf` (`n + 1` values).
 *
 * # Safety
 * `buf` must be valid for `len` doubles.
 */
enum SubdiffStatus subdiff_shifted_weights(double order, size_t n, double *buf, size_t len);

/**
 * Stability condition, amplification sweep (1001 samples) and eigenvalue minimum.
 *
 * # Safety
 * `out` must be valid for a write.
 */
enum SubdiffStatus subdiff_stability_check(uint32_t scheme,
                                           double alpha,
                                           double beta,
                                           double a_coef,
                                           double b_coef,
                                           double tau,
                                           double h,
                                           struct SubdiffStability *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SUBDIFF_H */
