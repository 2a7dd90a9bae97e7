#ifndef MFDP_H
#define MFDP_H

/* C interface for median-FDP envelope analysis. All functions that can fail
 * return mfdp_status; on failure mfdp_last_error() describes the problem for
 * the calling thread. Handles are freed with their matching _free call. */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define MFDP_API __declspec(dllexport)
#else
#define MFDP_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum mfdp_status {
  MFDP_OK = 0,
  MFDP_ERR_INVALID_ARGUMENT = 1, /* bad parameter (gamma, window, null pointer, ...) */
  MFDP_ERR_DOMAIN = 2,           /* invalid input data (p-values outside (0,1], ...) */
  MFDP_ERR_RANGE = 3,            /* threshold outside the envelope window */
  MFDP_ERR_CAPACITY = 4,         /* guarded size limit exceeded */
  MFDP_ERR_IO = 5,
  MFDP_ERR_PARSE = 6,
  MFDP_ERR_NOMEM = 7,
  MFDP_ERR_INTERNAL = 8
} mfdp_status;

/* message for the most recent failure on this thread; empty string if none */
MFDP_API const char* mfdp_last_error(void);

MFDP_API const char* mfdp_version(void);

/* ---- p-value sets ---- */

typedef struct mfdp_pvalues mfdp_pvalues;

MFDP_API mfdp_status mfdp_pvalues_create(const double* values, int64_t n, mfdp_pvalues** out);

/* CSV/TSV ingestion; column may be a header name, a 1-based index, or NULL
 * for single-column files */
MFDP_API mfdp_status mfdp_pvalues_read_csv(const char* path, const char* column, mfdp_pvalues** out);

MFDP_API void mfdp_pvalues_free(mfdp_pvalues* p);

MFDP_API int64_t mfdp_pvalues_size(const mfdp_pvalues* p);

/* ascending values; out must hold mfdp_pvalues_size entries */
MFDP_API mfdp_status mfdp_pvalues_sorted(const mfdp_pvalues* p, double* out);

/* original input index of each sorted entry */
MFDP_API mfdp_status mfdp_pvalues_order(const mfdp_pvalues* p, int64_t* out);

/* |{p_i <= t}| */
MFDP_API mfdp_status mfdp_count_rejections(const mfdp_pvalues* p, double t, int64_t* out);

/* |{p_i >= 1-t}|: 50%-confidence bound for false rejections at t */
MFDP_API mfdp_status mfdp_count_upper_tail(const mfdp_pvalues* p, double t, int64_t* out);

/* ---- null-fraction point estimates ---- */

/* |{p_i > lambda}| / (m(1-lambda)); clamped = min(raw, 1) */
MFDP_API mfdp_status mfdp_storey_pi0(const mfdp_pvalues* p, double lambda, double* raw, double* clamped);

/* (|{p_i > t}| + |{p_i >= 1-t}|) / m; median unbiased */
MFDP_API mfdp_status mfdp_median_unbiased_pi0(const mfdp_pvalues* p, double t, double* raw, double* clamped);

typedef struct mfdp_threshold_report {
  double t;
  int64_t rejections;
  int64_t false_rejection_bound;
  double fdp_bound;
  int64_t true_rejection_lower;
  double tdp_lower;
} mfdp_threshold_report;

MFDP_API mfdp_status mfdp_threshold_report_at(const mfdp_pvalues* p, double t, mfdp_threshold_report* out);

/* ---- confidence envelopes ---- */

typedef struct mfdp_envelope mfdp_envelope;

/* largest feasible slope of the linear candidate family on [t_min, t_max];
 * +inf when the zero curve already dominates. fallback is set to 1 in the
 * degenerate case where no slope can dominate (t_min = 0, c = 0, some p = 1)
 * and the best value over the satisfiable constraints is returned. */
MFDP_API mfdp_status mfdp_kappa_max(const mfdp_pvalues* p, double c, double t_min, double t_max,
                                    double* kappa, int* fallback);

/* floor((t+c)/kappa), the candidate curve value */
MFDP_API mfdp_status mfdp_candidate_bound(double kappa, double c, double t, int64_t* out);

MFDP_API mfdp_status mfdp_envelope_build(const mfdp_pvalues* p, double c, double t_min, double t_max,
                                         mfdp_envelope** out);

/* tightened envelope: R(t) minus the largest certified surplus so far */
MFDP_API mfdp_status mfdp_envelope_improve(const mfdp_pvalues* p, const mfdp_envelope* env,
                                           mfdp_envelope** out);

MFDP_API void mfdp_envelope_free(mfdp_envelope* env);

MFDP_API mfdp_status mfdp_envelope_value_at(const mfdp_envelope* env, double t, int64_t* out);

/* min(env(t)/R(t), 1); 0 when both are zero, 1 when R = 0 < env */
MFDP_API mfdp_status mfdp_envelope_fdp_at(const mfdp_pvalues* p, const mfdp_envelope* env, double t,
                                          double* out);

MFDP_API mfdp_status mfdp_envelope_info(const mfdp_envelope* env, double* kappa, double* c, double* t_min,
                                        double* t_max, int* improved, int* fallback);

typedef struct mfdp_curve_table mfdp_curve_table;

/* one row per threshold where R, the plain curve or the improved curve moves;
 * fails with MFDP_ERR_CAPACITY beyond max_rows */
MFDP_API mfdp_status mfdp_curve_table_build(const mfdp_pvalues* p, double c, double t_min, double t_max,
                                            int64_t max_rows, mfdp_curve_table** out);

MFDP_API int64_t mfdp_curve_table_rows(const mfdp_curve_table* table);

MFDP_API mfdp_status mfdp_curve_table_row(const mfdp_curve_table* table, int64_t i, double* t,
                                          int64_t* rejections, int64_t* plain, int64_t* improved,
                                          double* fdp_bound);

MFDP_API void mfdp_curve_table_free(mfdp_curve_table* table);

/* ---- mFDP control ---- */

/* largest rejectable p-value at level gamma (0 if none) */
MFDP_API mfdp_status mfdp_t_max(const mfdp_pvalues* p, const mfdp_envelope* env, double gamma, double* out);

/* adjusted values in input order; out holds m entries, HUGE_VAL = unbounded */
MFDP_API mfdp_status mfdp_adjusted_pvalues(const mfdp_pvalues* p, const mfdp_envelope* env, double* out);

typedef struct mfdp_report mfdp_report;

MFDP_API mfdp_status mfdp_reject_at(const mfdp_pvalues* p, const mfdp_envelope* env, double gamma,
                                    mfdp_report** out);

MFDP_API mfdp_status mfdp_report_info(const mfdp_report* r, double* gamma, double* t_max,
                                      int64_t* rejections, double* fdp_bound);

/* rejected input indices, ascending; out must hold `rejections` entries */
MFDP_API mfdp_status mfdp_report_rejected(const mfdp_report* r, int64_t* out);

/* adjusted values in input order; out must hold m entries */
MFDP_API mfdp_status mfdp_report_adjusted(const mfdp_report* r, double* out);

MFDP_API void mfdp_report_free(mfdp_report* r);

/* step-up baseline: largest k with p_(k) <= k*alpha/m */
MFDP_API mfdp_status mfdp_bh_rejections(const mfdp_pvalues* p, double alpha, int64_t* out);

/* ---- closed-testing cross-checks ---- */

typedef enum mfdp_psi {
  MFDP_PSI_ONE = 0,
  MFDP_PSI_LINEAR = 1,
  MFDP_PSI_QUADRATIC = 2
} mfdp_psi;

MFDP_API mfdp_status mfdp_local_test(const mfdp_pvalues* p, const int64_t* subset, int64_t n_subset,
                                     double t, mfdp_psi psi, double* w_minus, double* w_plus, int* reject);

MFDP_API mfdp_status mfdp_generalized_n_bound(const mfdp_pvalues* p, double t, mfdp_psi psi, int64_t* out);

MFDP_API mfdp_status mfdp_generalized_v_bound(const mfdp_pvalues* p, double t, mfdp_psi psi, int64_t* out);

/* exhaustive closed-testing bound over a subset (<= 22 indices); requires an
 * improved envelope whose window ends below 1/2 */
MFDP_API mfdp_status mfdp_brute_force_closed_bound(const mfdp_pvalues* p, const int64_t* subset,
                                                   int64_t n_subset, const mfdp_envelope* env, int64_t* out);

/* randomized equivalence check of the improved envelope against the
 * exhaustive bound; passes when *mismatches == 0 */
MFDP_API mfdp_status mfdp_verify_envelope_equivalence(int64_t instances, uint64_t seed, int64_t m_min,
                                                      int64_t m_max, int64_t* points_checked,
                                                      int64_t* mismatches);

/* ---- Monte Carlo harness ---- */

typedef enum mfdp_dependence {
  MFDP_DEP_INDEPENDENT = 0,
  MFDP_DEP_EQUICORRELATED = 1,
  MFDP_DEP_BLOCK = 2,
  MFDP_DEP_TWO_LEVEL_BLOCK = 3
} mfdp_dependence;

typedef enum mfdp_sidedness {
  MFDP_TWO_SIDED = 0,
  MFDP_RIGHT_SIDED = 1
} mfdp_sidedness;

typedef struct mfdp_scenario {
  int64_t m;
  double pi0;
  double delta;
  int dependence; /* mfdp_dependence */
  double rho;
  int64_t n_blocks;
  double rho_within;
  double rho_between;
  int sidedness; /* mfdp_sidedness */
  int64_t reps;
  uint64_t seed;
  double window_lo;
  double window_hi;
  double c; /* negative: use 1/(2m) */
  const double* gamma_grid;
  int64_t n_gamma;
  double bh_alpha;
  int use_improved_envelope;
  int use_dense_sampler;
  int threads; /* 0: hardware concurrency */
} mfdp_scenario;

/* fill with the defaults (m = 1000, pi0 = 1, window [0, 0.1], c = 1/(2m),
 * gamma_grid NULL meaning {0.05}, 1000 reps, seed 1) */
MFDP_API void mfdp_scenario_init(mfdp_scenario* s);

/* frequency of any-threshold envelope violations, with binomial SE */
MFDP_API mfdp_status mfdp_simulate_error_rate(const mfdp_scenario* s, double* error_rate, double* error_se);

/* mean fraction of false hypotheses rejected per gamma (arrays of n_gamma)
 * and for the step-up baseline at bh_alpha */
MFDP_API mfdp_status mfdp_simulate_power(const mfdp_scenario* s, double* power, double* power_se,
                                         double* bh_power, double* bh_power_se);

#ifdef __cplusplus
}
#endif

#endif /* MFDP_H */
