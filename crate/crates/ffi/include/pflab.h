#ifndef PFLAB_H
#define PFLAB_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

// Outcome of a call.
typedef enum PflabStatus {
  PFLAB_STATUS_OK = 0,
  PFLAB_STATUS_NULL_POINTER = 1,
  PFLAB_STATUS_INVALID_UTF8 = 2,
  PFLAB_STATUS_DOMAIN = 3,
  PFLAB_STATUS_INVALID_GRID = 4,
  PFLAB_STATUS_QUADRATURE = 5,
  PFLAB_STATUS_EMPTY_SAMPLE = 6,
  PFLAB_STATUS_MODEL = 7,
  PFLAB_STATUS_UNKNOWN_EXPERIMENT = 8,
  PFLAB_STATUS_CONFIG = 9,
  PFLAB_STATUS_IO = 10,
  PFLAB_STATUS_JSON = 11,
  PFLAB_STATUS_PANIC = 12,
} PflabStatus;

// Law of the last visit of a level before a horizon: an atom at 0 plus a
// density.
typedef struct PflabLaw PflabLaw;

// Result of an experiment run.
typedef struct PflabSummary PflabSummary;

// Scale of an experiment run.
typedef struct PflabRunConfig {
  uint64_t seed;
  uintptr_t paths;
  uintptr_t grid;
  double tol_multiplier;
} PflabRunConfig;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or NULL. The pointer
// stays valid until the next failing call on the same thread.
const char *pflab_last_error_message(void);

// Library version as a static NUL-terminated string.
const char *pflab_version(void);

// Probability that a Brownian bridge from 0 to m over [0, u] reaches lambda.
enum PflabStatus pflab_bridge_hit_prob(double lambda, double m, double u, double *out);

// P(sup_{t<=1} B_t/(a+bt) > lambda | B_1 = m). `in_domain` may be NULL.
enum PflabStatus pflab_sloped_sup_prob(double a,
                                       double b,
                                       double lambda,
                                       double m,
                                       double *out,
                                       bool *in_domain);

// Probability that B + nu*u avoids l on (s, t) given B_s = x, B_t = y.
enum PflabStatus pflab_sigma_pf(double s,
                                double t,
                                double x,
                                double y,
                                double nu,
                                double l,
                                double *out);

// exp(-2(x+nu*s-l)(y+nu*t-l)/(t-s)).
enum PflabStatus pflab_h_pfh_lnu(double s,
                                 double t,
                                 double x,
                                 double y,
                                 double nu,
                                 double l,
                                 double *out);

// exp(a(y-x)/(t-s) - a^2/(2(t-s))).
enum PflabStatus pflab_h_pfh_harness(double s, double t, double x, double y, double a, double *out);

// exp(-2<x, y>/(t-s)) for `dim`-dimensional endpoints.
enum PflabStatus pflab_e_st(double s,
                            double t,
                            const double *x,
                            const double *y,
                            uintptr_t dim,
                            double *out);

// Coefficient of l^p nu^q in the expansion of h^(l,nu)(s, t; x, y).
enum PflabStatus pflab_pf_hermite_coeff(uintptr_t p,
                                        uintptr_t q,
                                        double s,
                                        double t,
                                        double x,
                                        double y,
                                        double *out);

// E[(exp(B_t - t/2) - K)^+].
enum PflabStatus pflab_bs_call_gbm(double t, double k, double *out);

// E[(K - exp(B_t - t/2))^+].
enum PflabStatus pflab_bs_put_gbm(double t, double k, double *out);

// P(G_K <= t) for the last passage of the geometric Brownian motion at K.
enum PflabStatus pflab_last_passage_cdf_g(double t, double k, double *out);

// Expected local time at K up to t of the geometric Brownian motion.
enum PflabStatus pflab_expected_local_time_gbm(double k, double t, double *out);

enum PflabStatus pflab_rho(double u, double *out);

// r(t) = E[(M_t - 1)^+] for M = 1/BES(3) started at 1.
enum PflabStatus pflab_r_of_t(double t, double *out);

// a_n(t) = E[(A_t/t)^n] by quadrature, 1 <= n <= 4.
enum PflabStatus pflab_asian_moment(uintptr_t n, double t, double *out);

// C(s_1, ..., s_n) for ordered non-negative times.
enum PflabStatus pflab_c_quadratic(const double *s, uintptr_t n, double *out);

// Last visit of x before t by a driftless Brownian motion from 0.
enum PflabStatus pflab_law_g0(double x, double t, struct PflabLaw **out);

// Last visit of x before t by B + nu*u.
enum PflabStatus pflab_law_g_nu(double x, double nu, double t, struct PflabLaw **out);

// Mass of the atom at 0 (the level is never visited).
enum PflabStatus pflab_law_atom(const struct PflabLaw *law, double *out);

enum PflabStatus pflab_law_density(const struct PflabLaw *law, double u, double *out);

// P(g <= u), including the atom.
enum PflabStatus pflab_law_cdf(const struct PflabLaw *law, double u, double *out);

enum PflabStatus pflab_law_total_mass(const struct PflabLaw *law, double *out);

// Releases a law; NULL is ignored.
void pflab_law_free(struct PflabLaw *law);

// Defaults used by the command-line tool.
struct PflabRunConfig pflab_run_config_default(void);

// Runs an experiment selector (or "all"). A run whose checks fail still
// returns PFLAB_STATUS_OK; inspect the summary for the outcome.
enum PflabStatus pflab_run_experiment(const char *selector,
                                      const struct PflabRunConfig *config,
                                      struct PflabSummary **out);

// Number of passed and failed gated checks. Either pointer may be NULL.
enum PflabStatus pflab_summary_counts(const struct PflabSummary *summary,
                                      uintptr_t *passed,
                                      uintptr_t *failed);

// JSON report as a new string; release it with `pflab_string_free`.
enum PflabStatus pflab_summary_json(const struct PflabSummary *summary, char **out);

// Releases a summary; NULL is ignored.
void pflab_summary_free(struct PflabSummary *summary);

// Releases a string returned by this library; NULL is ignored.
void pflab_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PFLAB_H */
