/* C interface to the epsent coding-for-computing toolkit. */

#ifndef EPSENT_H
#define EPSENT_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible call.
 */
typedef enum EpsentStatus {
  EPSENT_STATUS_OK = 0,
  /**
   * A required pointer argument was NULL.
   */
  EPSENT_STATUS_NULL_ARGUMENT = 1,
  /**
   * A string argument was not valid UTF-8.
   */
  EPSENT_STATUS_INVALID_UTF8 = 2,
  EPSENT_STATUS_IO_ERROR = 3,
  EPSENT_STATUS_PARSE_ERROR = 4,
  /**
   * The instance violates a structural invariant.
   */
  EPSENT_STATUS_INVALID_INSTANCE = 5,
  /**
   * The instance exceeds the exact-enumeration guard.
   */
  EPSENT_STATUS_TOO_LARGE = 6,
  /**
   * A codec or operation precondition failed.
   */
  EPSENT_STATUS_PRECONDITION = 7,
  /**
   * An internal invariant failed (a bug; please report).
   */
  EPSENT_STATUS_INTERNAL = 8,
} EpsentStatus;

/**
 * Opaque hypergraph handle.
 */
typedef struct EpsentHypergraph EpsentHypergraph;

/**
 * Opaque problem-instance handle.
 */
typedef struct EpsentInstance EpsentInstance;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *epsent_version(void);

/**
 * Description of the most recent failure on this thread.
 */
const char *epsent_last_error_message(void);

/**
 * Frees a string returned through an out-pointer.
 *
 * # Safety
 * `ptr` must have been produced by this library and not freed before.
 */
void epsent_string_free(char *ptr);

/**
 * Loads and validates an instance file.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be a valid pointer.
 */
enum EpsentStatus epsent_instance_load(const char *path, struct EpsentInstance **out);

/**
 * Parses and validates an instance from a JSON string.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be a valid pointer.
 */
enum EpsentStatus epsent_instance_from_json(const char *json, struct EpsentInstance **out);

/**
 * Copies an instance with a different fidelity cap.
 *
 * # Safety
 * `inst` must be a live instance handle; `out` must be valid.
 */
enum EpsentStatus epsent_instance_with_epsilon(const struct EpsentInstance *inst,
                                               double epsilon,
                                               struct EpsentInstance **out);

/**
 * # Safety
 * `inst` must have come from an instance constructor, at most once.
 */
void epsent_instance_free(struct EpsentInstance *inst);

/**
 * Enumerates the maximal hyperedges of the instance's characteristic
 * hypergraph.
 *
 * # Safety
 * `inst` must be a live handle; `out` must be valid.
 */
enum EpsentStatus epsent_hypergraph_build(const struct EpsentInstance *inst,
                                          struct EpsentHypergraph **out);

/**
 * # Safety
 * `graph` must have come from `epsent_hypergraph_build`, at most once.
 */
void epsent_hypergraph_free(struct EpsentHypergraph *graph);

/**
 * Number of maximal hyperedges; 0 for a NULL handle.
 *
 * # Safety
 * `graph` must be NULL or a live handle.
 */
size_t epsent_hypergraph_edge_count(const struct EpsentHypergraph *graph);

/**
 * Serializes the hypergraph as JSON; free with `epsent_string_free`.
 *
 * # Safety
 * `graph` must be a live handle; `out` must be valid.
 */
enum EpsentStatus epsent_hypergraph_to_json(const struct EpsentHypergraph *graph, char **out);

/**
 * True iff the instance satisfies the both-zero-or-both-positive
 * probability condition that guarantees a unique zero-fidelity clustering.
 *
 * # Safety
 * `inst` must be a live handle; `out` must be valid.
 */
enum EpsentStatus epsent_condition1(const struct EpsentInstance *inst, bool *out);

/**
 * Minimizes I(W;X|Y) over hyperedge-supported quantizers. Writes the
 * value in bits to `out_value`; when `out_json` is non-NULL, also writes
 * the full solution (channel rows and reconstruction points) as JSON.
 *
 * Pass `tol <= 0` and `max_iter == 0` for the defaults (1e-10, 10000).
 *
 * # Safety
 * `inst` must be a live handle; `out_value` must be valid; `out_json`
 * may be NULL.
 */
enum EpsentStatus epsent_solve_entropy(const struct EpsentInstance *inst,
                                       double tol,
                                       size_t max_iter,
                                       double *out_value,
                                       char **out_json);

/**
 * Traces the piecewise-constant rate curve and returns it as CSV rows
 * (eps_lo, eps_hi, rate); free with `epsent_string_free`.
 *
 * # Safety
 * `inst` must be a live handle; `out_csv` must be valid.
 */
enum EpsentStatus epsent_rate_curve_csv(const struct EpsentInstance *inst, char **out_csv);

/**
 * Minimum enclosing ball of `n` points of dimension `dim`, row-major in
 * `points`. Writes the center to `out_center` (length `dim`) and the
 * radius to `out_radius`.
 *
 * # Safety
 * `points` must hold n*dim doubles; `out_center` must hold dim doubles;
 * `out_radius` must be valid.
 */
enum EpsentStatus epsent_min_enclosing_ball(const double *points,
                                            size_t n,
                                            size_t dim,
                                            double *out_center,
                                            double *out_radius);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* EPSENT_H */
