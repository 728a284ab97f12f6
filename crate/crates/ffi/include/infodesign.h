/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#ifndef INFODESIGN_H
#define INFODESIGN_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum InfodesignStatus {
  INFODESIGN_STATUS_OK = 0,
  INFODESIGN_STATUS_NULL_POINTER = 1,
  INFODESIGN_STATUS_INVALID_UTF8 = 2,
  INFODESIGN_STATUS_PANIC = 3,
  INFODESIGN_STATUS_INVALID_DISTRIBUTION = 10,
  INFODESIGN_STATUS_DIMENSION_MISMATCH = 11,
  INFODESIGN_STATUS_OUT_OF_RANGE = 12,
  INFODESIGN_STATUS_ABSOLUTE_CONTINUITY = 13,
  INFODESIGN_STATUS_NON_CONVERGENCE = 14,
  INFODESIGN_STATUS_INVALID_SPLIT = 15,
  INFODESIGN_STATUS_NO_INFORMATION = 16,
  INFODESIGN_STATUS_UNSUPPORTED = 17,
  INFODESIGN_STATUS_INVALID_CONFIG = 18,
  INFODESIGN_STATUS_CODEBOOK_TOO_LARGE = 19,
  INFODESIGN_STATUS_INTRACTABLE = 20,
  INFODESIGN_STATUS_INFEASIBLE_RATE = 21,
  INFODESIGN_STATUS_EMPTY_FEASIBLE_SET = 22,
  INFODESIGN_STATUS_IO = 23,
  INFODESIGN_STATUS_PARSE = 24,
} InfodesignStatus;

/**
 * Feasibility constraint for [`infodesign_solve`].
 */
typedef enum InfodesignMode {
  /**
   * any Bayes-plausible split
   */
  INFODESIGN_MODE_UNCONSTRAINED = 0,
  /**
   * one symbol over a BSC; `param` is the crossover probability
   */
  INFODESIGN_MODE_ONE_SHOT = 1,
  /**
   * block coding; `param` is the channel capacity in bits
   */
  INFODESIGN_MODE_BLOCK = 2,
} InfodesignMode;

/**
 * Opaque persuasion scenario.
 */
typedef struct InfodesignScenario InfodesignScenario;

/**
 * Sender-optimal binary split.
 */
typedef struct InfodesignEquilibrium {
  double p1;
  double p2;
  double alpha;
  double beta;
  /**
   * probability of message w1
   */
  double weight_w1;
  size_t action_w1;
  size_t action_w2;
  double phi1_star;
  double phi2_star;
  bool no_information;
  bool feasible;
  double slack;
} InfodesignEquilibrium;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or NULL. The pointer stays
 * valid until the next call into this library on the same thread.
 */
const char *infodesign_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *infodesign_version(void);

/**
 * Release a string returned by this library. NULL is ignored.
 *
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void infodesign_string_free(char *s);

/**
 * Capacity of a BSC, in bits.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum InfodesignStatus infodesign_bsc_capacity(double eps, double *out);

/**
 * Capacity in bits of the `rows × cols` row-major channel matrix.
 *
 * # Safety
 * `matrix` must hold `rows * cols` doubles; `out` must be valid for writes.
 */
enum InfodesignStatus infodesign_capacity(const double *matrix,
                                          size_t rows,
                                          size_t cols,
                                          double *out);

/**
 * Signal parameters `(alpha, beta)` inducing the split `(p1, p2)` of `p`.
 *
 * # Safety
 * `alpha` and `beta` must be valid for writes.
 */
enum InfodesignStatus infodesign_signal_from_posteriors(double p,
                                                        double p1,
                                                        double p2,
                                                        double *alpha,
                                                        double *beta);

/**
 * Posteriors `(p1, p2)` induced by the signal `(alpha, beta)` under prior `p`.
 *
 * # Safety
 * `p1` and `p2` must be valid for writes.
 */
enum InfodesignStatus infodesign_posteriors_from_signal(double p,
                                                        double alpha,
                                                        double beta,
                                                        double *p1,
                                                        double *p2);

/**
 * One-shot feasibility of the split `(p1, p2)` over a BSC(`eps`).
 *
 * # Safety
 * `feasible` and `slack` must be valid for writes.
 */
enum InfodesignStatus infodesign_one_shot_feasible(double p,
                                                   double p1,
                                                   double p2,
                                                   double eps,
                                                   bool *feasible,
                                                   double *slack);

/**
 * Block-coding feasibility of the signal `(alpha, beta)` under capacity
 * `capacity` bits.
 *
 * # Safety
 * `feasible` and `slack` must be valid for writes.
 */
enum InfodesignStatus infodesign_block_feasible(double p,
                                                double alpha,
                                                double beta,
                                                double capacity,
                                                bool *feasible,
                                                double *slack);

/**
 * Parse a scenario document (a utility table or a MAC configuration).
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be valid for writes.
 */
enum InfodesignStatus infodesign_scenario_from_json(const char *json,
                                                    struct InfodesignScenario **out);

/**
 * The bundled MAC power-allocation scenario.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum InfodesignStatus infodesign_scenario_mac_default(struct InfodesignScenario **out);

/**
 * Number of receiver actions, or 0 for NULL.
 *
 * # Safety
 * `sc` must be NULL or a live handle.
 */
size_t infodesign_scenario_actions(const struct InfodesignScenario *sc);

/**
 * Release a scenario handle. NULL is ignored.
 *
 * # Safety
 * `sc` must come from this library and not have been freed.
 */
void infodesign_scenario_free(struct InfodesignScenario *sc);

/**
 * Grid-search the sender-optimal split at posterior step `resolution`.
 *
 * # Safety
 * `sc` must be a live handle; `out` must be valid for writes.
 */
enum InfodesignStatus infodesign_solve(const struct InfodesignScenario *sc,
                                       enum InfodesignMode mode,
                                       double param,
                                       double resolution,
                                       struct InfodesignEquilibrium *out);

/**
 * As [`infodesign_solve`], returning the full report as JSON.
 *
 * # Safety
 * `sc` must be a live handle; `out` must be valid for writes.
 */
enum InfodesignStatus infodesign_solve_json(const struct InfodesignScenario *sc,
                                            enum InfodesignMode mode,
                                            double param,
                                            double resolution,
                                            char **out);

/**
 * Run a simulator experiment described by `experiment_json` and return its
 * summary as JSON. `trials` of 0 uses the experiment's own count.
 *
 * # Safety
 * `experiment_json` must be a NUL-terminated string; `out` must be valid for
 * writes.
 */
enum InfodesignStatus infodesign_simulate_json(const char *experiment_json,
                                               size_t trials,
                                               char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* INFODESIGN_H */
