/*
 * varexp: simulation and verification of the mean-reverting diffusion
 *
 *     dv = kappa (theta - v) dt + xi v^{p(v)} dW
 *
 * with a state-dependent exponent p(v), plus the classical CIR model and the
 * constant-power family dv = kappa v^a (theta - v) dt + xi v^b dW.
 *
 * All functions return a varexp_status. On failure the thread-local message
 * from varexp_last_error() describes the problem. Handles are opaque and
 * owned by the caller; release them with the matching *_free function
 * (passing NULL is allowed). Handles are immutable after creation and may be
 * read from several threads at once.
 */
#ifndef VAREXP_VAREXP_H
#define VAREXP_VAREXP_H

#include <stddef.h>
#include <stdint.h>

#if defined(VAREXP_BUILDING_LIBRARY)
#define VAREXP_API __attribute__((visibility("default")))
#else
#define VAREXP_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum varexp_status {
    VAREXP_OK = 0,
    VAREXP_ERR_INVALID_ARGUMENT = 1, /* bad spec string, precondition, NULL handle */
    VAREXP_ERR_DOMAIN = 2,           /* state outside a coefficient's domain */
    VAREXP_ERR_HYPOTHESIS = 3,       /* exponent outside [1/2, 1] */
    VAREXP_ERR_NUMERIC = 4,          /* overflow, non-finite state */
    VAREXP_ERR_RESOURCE = 5,         /* allocation above the documented limit */
    VAREXP_ERR_INTERNAL = 6
} varexp_status;

VAREXP_API const char* varexp_version(void);
VAREXP_API const char* varexp_last_error(void);
VAREXP_API const char* varexp_status_name(varexp_status status);

/* ------------------------------------------------------------------------ */
/* Exponent functions                                                        */
/* ------------------------------------------------------------------------ */

typedef struct varexp_exponent varexp_exponent;
typedef double (*varexp_scalar_fn)(double x, void* user);

/* "p1" | "p2" | "p3" | "const:<c>". Constants outside [1/2, 1] fail with
 * VAREXP_ERR_HYPOTHESIS. */
VAREXP_API varexp_status varexp_exponent_make(const char* spec, varexp_exponent** out);
/* Same grammar, no range check (for feeding varexp_exponent_validate). */
VAREXP_API varexp_status varexp_exponent_parse(const char* spec, varexp_exponent** out);
/* User-supplied p and p'. `user` must outlive the handle and any model built
 * from it. */
VAREXP_API varexp_status varexp_exponent_custom(varexp_scalar_fn eval, varexp_scalar_fn deriv,
                                                void* user, double declared_pminus,
                                                double declared_pplus, double delta,
                                                double dsup, varexp_exponent** out);
VAREXP_API void varexp_exponent_free(varexp_exponent* fn);
/* The returned string lives as long as the handle. */
VAREXP_API varexp_status varexp_exponent_name(const varexp_exponent* fn, const char** out);
VAREXP_API varexp_status varexp_exponent_eval(const varexp_exponent* fn, double x, double* out);
VAREXP_API varexp_status varexp_exponent_deriv(const varexp_exponent* fn, double x, double* out);

typedef struct varexp_hypothesis_grid {
    double x_min;         /* default 1e-12 */
    double x_max;         /* default 1e12 */
    int points;           /* log-spaced points, default 10000 */
    int near_zero_points; /* dense points on (0, delta), default 2000 */
    int band_n;           /* sup |p'| is also reported on [1/n, n], default 10 */
    double tol;           /* default 1e-12 */
} varexp_hypothesis_grid;

VAREXP_API void varexp_hypothesis_grid_default(varexp_hypothesis_grid* grid);

typedef enum varexp_hypothesis_clause {
    VAREXP_CLAUSE_NONE = 0,
    VAREXP_CLAUSE_LOWER_BOUND = 1,
    VAREXP_CLAUSE_UPPER_BOUND = 2,
    VAREXP_CLAUSE_DERIVATIVE_NEAR_ZERO = 3
} varexp_hypothesis_clause;

typedef struct varexp_hypothesis_report {
    double observed_inf;
    double observed_sup;
    double observed_dsup_near_zero;
    double observed_dsup_band;
    double p_at_zero_plus;
    double delta;
    double grid_x_min;
    double grid_x_max;
    int grid_points;
    int evaluated_points;
    int pass;
    int failing_clause; /* varexp_hypothesis_clause */
} varexp_hypothesis_report;

/* grid may be NULL for the defaults. */
VAREXP_API varexp_status varexp_exponent_validate(const varexp_exponent* fn,
                                                  const varexp_hypothesis_grid* grid,
                                                  varexp_hypothesis_report* out);
VAREXP_API const char* varexp_clause_name(int clause);

/* ------------------------------------------------------------------------ */
/* Models                                                                    */
/* ------------------------------------------------------------------------ */

typedef struct varexp_params {
    double kappa;
    double theta;
    double xi;
    double v0;
} varexp_params;

/* kappa = 2.0, theta = 0.05, xi = 0.3, v0 = 0.05 */
VAREXP_API void varexp_params_default(varexp_params* params);

typedef struct varexp_model varexp_model;

/* "gm:<exponent>" | "cir" | "pkm:a=<0|1>,b=<0.5|1|1.5>". params may be NULL
 * for the defaults; the same holds for every varexp_params argument below. */
VAREXP_API varexp_status varexp_model_parse(const char* spec, const varexp_params* params,
                                            varexp_model** out);
/* GM model with a copy of `exponent`. */
VAREXP_API varexp_status varexp_model_gm(const varexp_exponent* exponent,
                                         const varexp_params* params, varexp_model** out);
VAREXP_API void varexp_model_free(varexp_model* model);
VAREXP_API varexp_status varexp_model_id(const varexp_model* model, const char** out);
VAREXP_API varexp_status varexp_model_params(const varexp_model* model, varexp_params* out);

VAREXP_API varexp_status varexp_drift(const varexp_model* model, double x, double* out);
VAREXP_API varexp_status varexp_diffusion(const varexp_model* model, double x, double* out);
VAREXP_API varexp_status varexp_growth_constant(const varexp_model* model, double* out);
VAREXP_API varexp_status varexp_feller_function(const varexp_model* model, double x,
                                                double* out);
/* 1/2 g(x)^2 h2 + f(x) h1 */
VAREXP_API varexp_status varexp_generator_apply(const varexp_model* model, double x, double h1,
                                                double h2, double* out);

typedef enum varexp_feller_criterion {
    VAREXP_FELLER_CONSTANT_HALF = 0,
    VAREXP_FELLER_P0_ABOVE_HALF = 1,
    VAREXP_FELLER_P0_EQUAL_HALF = 2,
    VAREXP_FELLER_P0_BELOW_HALF = 3
} varexp_feller_criterion;

typedef enum varexp_feller_verdict {
    VAREXP_FELLER_NON_ATTAINABLE = 0,
    VAREXP_FELLER_ATTAINABLE = 1,
    VAREXP_FELLER_INCONCLUSIVE = 2
} varexp_feller_verdict;

typedef struct varexp_feller_report {
    double analytic_limit;
    double p_at_zero;
    int criterion; /* varexp_feller_criterion */
    int verdict;   /* varexp_feller_verdict */
    int profile_consistent;
    int classical_applies; /* 2 kappa theta >= xi^2 decides the verdict */
    double classical_lhs;  /* 2 kappa theta */
    double classical_rhs;  /* xi^2 */
    size_t profile_size;
} varexp_feller_report;

/* Writes up to `capacity` profile points (x, T_p(x)) into the optional
 * buffers; profile_size is always the full length. */
VAREXP_API varexp_status varexp_feller_check(const varexp_model* model,
                                             varexp_feller_report* out, double* profile_x,
                                             double* profile_value, size_t capacity);
VAREXP_API const char* varexp_feller_criterion_name(int criterion);
VAREXP_API const char* varexp_feller_verdict_name(int verdict);

/* ------------------------------------------------------------------------ */
/* Truncation                                                                */
/* ------------------------------------------------------------------------ */

/* epsilon <= 0 selects the default 1 / (2 n^2). */
typedef struct varexp_truncation {
    int n;
    double epsilon;
} varexp_truncation;

VAREXP_API varexp_status varexp_theta_n(varexp_truncation tp, double r, double* out);
VAREXP_API varexp_status varexp_rho_n(varexp_truncation tp, double x, double* out);
VAREXP_API varexp_status varexp_truncated_drift(const varexp_model* model, varexp_truncation tp,
                                                double x, double* out);
VAREXP_API varexp_status varexp_truncated_diffusion(const varexp_model* model,
                                                    varexp_truncation tp, double x,
                                                    double* out);

typedef struct varexp_lipschitz_report {
    int n;
    double epsilon;
    double phi_prime_sup;
    double p_prime_sup;
    double p_plus;
    double L_n;
    double C_n;
    double Lf_n;
    double Lg_n;
    double Lhat_n;
    double empirical_sup_quotient;   /* g_n */
    double empirical_sup_quotient_f; /* f_n */
    int sampled_pairs;
} varexp_lipschitz_report;

/* pairs <= 0 selects 10000. */
VAREXP_API varexp_status varexp_lipschitz_constants(const varexp_model* model,
                                                    varexp_truncation tp, int pairs,
                                                    uint64_t seed,
                                                    varexp_lipschitz_report* out);

/* ------------------------------------------------------------------------ */
/* Brownian increments                                                       */
/* ------------------------------------------------------------------------ */

/* Validates (T, dt) and returns round(T / dt). */
VAREXP_API varexp_status varexp_grid_steps(double T, double dt, int* n_steps);

typedef struct varexp_brownian varexp_brownian;

/* [m_paths x n_steps] N(0, dt) increments; entry (j, i) depends only on
 * (seed, j, i). */
VAREXP_API varexp_status varexp_brownian_sample(uint64_t seed, size_t m_paths, double T,
                                                double dt, int threads,
                                                varexp_brownian** out);
VAREXP_API void varexp_brownian_free(varexp_brownian* batch);
VAREXP_API size_t varexp_brownian_paths(const varexp_brownian* batch);
VAREXP_API int varexp_brownian_steps(const varexp_brownian* batch);
/* Borrowed pointer into the batch, valid for the handle's lifetime. */
VAREXP_API varexp_status varexp_brownian_row(const varexp_brownian* batch, size_t path,
                                             const double** row, size_t* len);
/* FNV-1a 64 of the increment matrix bytes. */
VAREXP_API uint64_t varexp_brownian_checksum(const varexp_brownian* batch);
/* Regenerates one row without building a batch; len must equal n_steps. */
VAREXP_API varexp_status varexp_sample_row(uint64_t seed, uint64_t path, double T, double dt,
                                           double* out, size_t len);

/* ------------------------------------------------------------------------ */
/* Solvers                                                                   */
/* ------------------------------------------------------------------------ */

typedef enum varexp_policy {
    VAREXP_POLICY_FULL_TRUNCATION = 0,
    VAREXP_POLICY_REFLECTION = 1
} varexp_policy;

/* values must hold len + 1 doubles. */
VAREXP_API varexp_status varexp_euler_path(const varexp_model* model, double T, double dt,
                                           const double* increments, size_t len, int policy,
                                           double* values, int* clamp_count);
/* Euler on the truncated coefficients evaluated at max(x, 0), no clamping of
 * the stored state; negative_count may be NULL. */
VAREXP_API varexp_status varexp_euler_truncated(const varexp_model* model, varexp_truncation tp,
                                                double T, double dt, const double* increments,
                                                size_t len, double* values,
                                                int* negative_count);

typedef struct varexp_paths varexp_paths;

VAREXP_API varexp_status varexp_simulate(const varexp_model* model, const varexp_brownian* batch,
                                         int policy, int threads, varexp_paths** out);
VAREXP_API void varexp_paths_free(varexp_paths* paths);
VAREXP_API size_t varexp_paths_count(const varexp_paths* paths);
VAREXP_API int varexp_paths_steps(const varexp_paths* paths);
VAREXP_API double varexp_paths_dt(const varexp_paths* paths);
VAREXP_API varexp_status varexp_paths_row(const varexp_paths* paths, size_t path,
                                          const double** values, size_t* len);
VAREXP_API varexp_status varexp_paths_clamp_count(const varexp_paths* paths, size_t path,
                                                  int* out);

typedef struct varexp_clamp_stats {
    long long total_clamps;
    long long paths_with_clamps;
    double clamp_fraction;
} varexp_clamp_stats;

VAREXP_API varexp_status varexp_paths_clamp_stats(const varexp_paths* paths,
                                                  varexp_clamp_stats* out);

typedef struct varexp_picard_summary {
    int iterations_used;
    int converged;
    double final_sup_diff;
    double rate_envelope_constant;
    size_t history_size;
} varexp_picard_summary;

/* sup_diffs (capacity entries) and fixed_point (len + 1 entries) are optional. */
VAREXP_API varexp_status varexp_picard_solve(const varexp_model* model, varexp_truncation tp,
                                             double T, double dt, const double* increments,
                                             size_t len, double tol, int k_max,
                                             varexp_picard_summary* out, double* sup_diffs,
                                             size_t capacity, double* fixed_point);

/* index = -1 when the path never leaves [1/n, n]. */
VAREXP_API varexp_status varexp_band_exit_index(const double* values, size_t len, int n,
                                                long long* index);

/* ------------------------------------------------------------------------ */
/* Analysis                                                                  */
/* ------------------------------------------------------------------------ */

VAREXP_API varexp_status varexp_empirical_moment(const varexp_paths* paths, double t, int m,
                                                 double* mean, double* stderr_out);
VAREXP_API varexp_status varexp_moment_bound(const varexp_params* params, int m, double t,
                                             double* C_m, double* bound);

typedef struct varexp_moment_report {
    int order;
    double t;
    double empirical;
    double stderr_value;
    double theoretical_bound;
    double C_m;
    int satisfied;
} varexp_moment_report;

/* out must hold n_orders * n_checkpoints reports, order-major. */
VAREXP_API varexp_status varexp_check_moment_bounds(const varexp_paths* paths,
                                                    const varexp_params* params,
                                                    const int* orders, size_t n_orders,
                                                    const double* checkpoints,
                                                    size_t n_checkpoints,
                                                    varexp_moment_report* out);
VAREXP_API varexp_status varexp_second_moment_bound(const varexp_model* model, double T,
                                                    double dt, double* out);

/* M_h(t_j) = v(t_j) - sum_{i<j} f(v(t_i)) dt for one path; out holds len values. */
VAREXP_API varexp_status varexp_martingale_statistic(const varexp_model* model, double dt,
                                                     const double* values, size_t len,
                                                     double* out);

typedef struct varexp_martingale_summary {
    double max_abs_drift;
    double bias_allowance;
    int satisfied;
} varexp_martingale_summary;

/* means and stderrs hold n_checkpoints values each. */
VAREXP_API varexp_status varexp_martingale_report(const varexp_paths* paths,
                                                  const varexp_model* model,
                                                  const double* checkpoints,
                                                  size_t n_checkpoints, double* means,
                                                  double* stderrs,
                                                  varexp_martingale_summary* out);

/* edges holds n_bins + 1 values, counts and densities n_bins each. A batch
 * whose values are all equal yields a single bin (bins_used = 1). */
VAREXP_API varexp_status varexp_terminal_histogram(const varexp_paths* paths, double t,
                                                   int n_bins, double* edges,
                                                   long long* counts, double* densities,
                                                   int* bins_used);
VAREXP_API varexp_status varexp_jensen_holds(const varexp_paths* paths, double t, int* out);

#ifdef __cplusplus
}
#endif

#endif /* VAREXP_VAREXP_H */
