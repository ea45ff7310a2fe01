#ifndef RATINGS_MARKET_H
#define RATINGS_MARKET_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdbool.h>
#include <stddef.h>

/**
 * Result codes.
 */
typedef enum RmStatus {
  RM_STATUS_OK = 0,
  RM_STATUS_NULL_POINTER = 1,
  RM_STATUS_VIOLATED_BOUND = 2,
  RM_STATUS_DEGENERATE_QUEUE = 3,
  RM_STATUS_INDETERMINATE = 4,
  RM_STATUS_INVALID_REGIME = 5,
  RM_STATUS_BRACKET_FAILURE = 6,
  RM_STATUS_OUT_OF_BAND = 7,
  RM_STATUS_MULTIPLE_EQUILIBRIA = 8,
  RM_STATUS_NO_EQUILIBRIUM = 9,
  RM_STATUS_STEP_TOO_LARGE = 10,
  RM_STATUS_INVALID_ARGUMENT = 11,
  RM_STATUS_INDEX_OUT_OF_RANGE = 12,
  RM_STATUS_PANIC = 13,
} RmStatus;

typedef enum RmKind {
  RM_KIND_NO_TRADE = 0,
  RM_KIND_NON_DISCRIMINATORY = 1,
  RM_KIND_DISCRIMINATORY = 2,
} RmKind;

typedef enum RmStability {
  RM_STABILITY_STABLE = 0,
  RM_STABILITY_UNSTABLE = 1,
  RM_STABILITY_NOT_ASSESSED = 2,
} RmStability;

/**
 * Equilibria with stability verdicts.
 */
typedef struct RmEquilibria RmEquilibria;

/**
 * Validated market parameters.
 */
typedef struct RmParams RmParams;

/**
 * Seller masses by (type, rating).
 */
typedef struct RmSteadyState {
  double p_hg;
  double p_lg;
  double p_hb;
  double p_lb;
} RmSteadyState;

/**
 * One equilibrium. Group 1 is the group with the longer `G` queue.
 */
typedef struct RmEquilibrium {
  enum RmKind kind;
  enum RmStability stability;
  double lambda_g1;
  double lambda_b1;
  double lambda_g2;
  double lambda_b2;
  double buyers1;
  double buyers2;
  double buyer_payoff;
} RmEquilibrium;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failure on this thread, or NULL. Valid until the
 * next failing call on the same thread.
 */
const char *rm_last_error(void);

/**
 * Validates parameters and creates a handle in `*out`.
 *
 * # Safety
 * `out` must be NULL or valid for writes.
 */
enum RmStatus rm_params_new(double delta,
                            double alpha,
                            double u_high,
                            double u_low,
                            double price,
                            double k,
                            double buyer_mass,
                            struct RmParams **out);

/**
 * # Safety
 * `p` must be NULL or a handle from [`rm_params_new`] not yet freed.
 */
void rm_params_free(struct RmParams *p);

/**
 * Elasticity threshold above which the `G` payoff is non-monotone.
 *
 * # Safety
 * Pointers must be valid; `params` from [`rm_params_new`].
 */
enum RmStatus rm_k_threshold(const struct RmParams *params, double *out);

/**
 * Steady-state masses for a unit seller population at the given queues.
 *
 * # Safety
 * Pointers must be valid; `params` from [`rm_params_new`].
 */
enum RmStatus rm_steady_state(const struct RmParams *params,
                              double lambda_g,
                              double lambda_b,
                              struct RmSteadyState *out);

/**
 * Interval of `G` queues on which the `G` payoff increases. `*exists` is
 * false when the payoff is monotone; the bounds are then untouched.
 *
 * # Safety
 * Pointers must be valid; `params` from [`rm_params_new`].
 */
enum RmStatus rm_increasing_interval(const struct RmParams *params,
                                     bool *exists,
                                     double *lower,
                                     double *upper);

/**
 * Buyer masses that support a discriminatory equilibrium.
 *
 * # Safety
 * Pointers must be valid; `params` from [`rm_params_new`].
 */
enum RmStatus rm_q_interval(const struct RmParams *params,
                            bool *exists,
                            double *lower,
                            double *upper);

/**
 * Every equilibrium at the configured buyer mass, with stability.
 *
 * # Safety
 * Pointers must be valid; `params` from [`rm_params_new`].
 */
enum RmStatus rm_solve(const struct RmParams *params, struct RmEquilibria **out);

/**
 * Number of equilibria in the list; 0 for NULL.
 *
 * # Safety
 * `list` must be NULL or a handle from [`rm_solve`] not yet freed.
 */
size_t rm_equilibria_len(const struct RmEquilibria *list);

/**
 * # Safety
 * `list` from [`rm_solve`]; `out` valid for writes.
 */
enum RmStatus rm_equilibria_get(const struct RmEquilibria *list,
                                size_t index,
                                struct RmEquilibrium *out);

/**
 * # Safety
 * `list` must be NULL or a handle from [`rm_solve`] not yet freed.
 */
void rm_equilibria_free(struct RmEquilibria *list);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RATINGS_MARKET_H */
